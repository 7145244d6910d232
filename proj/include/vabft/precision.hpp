#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace vabft {

enum class Format : uint8_t { BF16 = 0, FP16 = 1, FP32 = 2, FP64 = 3 };

const char* format_name(Format f);
Format format_from_name(const std::string& name);

enum class AccumKind : uint8_t {
    /// Low-precision inputs, FP32 accumulator, one rounding to the output
    /// format at the end (tensor-core style).
    Fp32AccumRoundOutput,
    /// Accumulate left-to-right in the format's own precision.
    NativeSequential,
    /// Chunks of `block_len` summed sequentially, then partials summed
    /// sequentially (tile-style accumulation).
    NativeBlocked,
    /// Balanced binary reduction tree in the format's own precision.
    NativePairwise,
};

struct AccumStrategy {
    AccumKind kind = AccumKind::NativeSequential;
    int64_t block_len = 128;

    std::string describe() const;
};

/// e_max as a function of the accumulation length.
struct EmaxModel {
    enum class Kind : uint8_t { Constant, SqrtScaled };
    Kind kind = Kind::Constant;
    double scale = 0.0;  // sqrt coefficient (SqrtScaled only)
    double offset = 0.0; // constant value / intercept

    static EmaxModel constant(double value) { return {Kind::Constant, 0.0, value}; }
    static EmaxModel sqrt_scaled(double scale, double offset) {
        return {Kind::SqrtScaled, scale, offset};
    }
    double resolve(int64_t dim) const;
};

enum class OverflowPolicy : uint8_t { Saturate, Error };

/// Floating-point format descriptor. `mantissa_bits` counts the full
/// significand including the implicit leading bit, so unit_roundoff is
/// exactly 2^-mantissa_bits.
struct PrecisionSpec {
    Format format = Format::FP64;
    int mantissa_bits = 53;
    double unit_roundoff = 0x1.0p-53;
    AccumStrategy accumulation{AccumKind::NativePairwise, 128};
    EmaxModel e_max_model = EmaxModel::constant(0x1.0p-52);
    OverflowPolicy overflow = OverflowPolicy::Saturate;

    static PrecisionSpec bf16();
    static PrecisionSpec fp16();
    static PrecisionSpec fp32();
    static PrecisionSpec fp64();
    static PrecisionSpec of(Format f);

    /// Smallest normal exponent e such that 2^e is normal in this format.
    int min_normal_exponent() const;
    double max_finite() const;
    double min_subnormal() const;
    int bit_width() const;
    const char* name() const { return format_name(format); }

    PrecisionSpec with_accumulation(AccumStrategy s) const {
        PrecisionSpec r = *this;
        r.accumulation = s;
        return r;
    }
    PrecisionSpec with_e_max(EmaxModel m) const {
        PrecisionSpec r = *this;
        r.e_max_model = m;
        return r;
    }
};

/// Round-to-nearest-even at the format's precision and exponent range.
/// Subnormals are kept (no flush to zero). Overflow follows fmt.overflow.
/// Throws std::domain_error on non-finite input.
double quantize(double x, const PrecisionSpec& fmt);

/// Dense row-major matrix. Storage is FP64; every stored value lies on the
/// grid of `format` (quantize(v) == v).
class Matrix {
public:
    Matrix() = default;
    Matrix(int64_t rows, int64_t cols, PrecisionSpec fmt);

    /// Builds a matrix from raw values. With quantize_values the data is
    /// rounded onto the format grid; otherwise off-grid values are an error.
    /// NaN/Inf input is always an error.
    static Matrix from_values(int64_t rows, int64_t cols,
                              std::span<const double> values, PrecisionSpec fmt,
                              bool quantize_values = true);
    static Matrix identity(int64_t n, PrecisionSpec fmt);

    int64_t rows() const { return rows_; }
    int64_t cols() const { return cols_; }
    const PrecisionSpec& format() const { return fmt_; }

    double operator()(int64_t i, int64_t j) const { return data_[i * cols_ + j]; }
    double at(int64_t i, int64_t j) const;
    void set(int64_t i, int64_t j, double v); // quantizes; rejects NaN/Inf

    std::span<const double> values() const { return data_; }
    std::span<const double> row(int64_t i) const {
        return {data_.data() + i * cols_, size_t(cols_)};
    }

    /// Raw write bypassing grid validation. Fault injection uses this to
    /// place NaN/Inf or arbitrary bit patterns.
    void set_raw(int64_t i, int64_t j, double v) { data_[i * cols_ + j] = v; }

    bool same_bits(const Matrix& other) const;

private:
    int64_t rows_ = 0;
    int64_t cols_ = 0;
    PrecisionSpec fmt_{};
    std::vector<double> data_;
};

/// Matrix product under the emulated arithmetic of A's format.
Matrix gemm_emulated(const Matrix& a, const Matrix& b);

struct GemmResult {
    Matrix c;     // quantized to the output format
    Matrix accum; // accumulator values before output quantization
};
GemmResult gemm_emulated_with_accum(const Matrix& a, const Matrix& b);

/// The precision a strategy accumulates in: FP32 for Fp32AccumRoundOutput
/// and FP32-format natives, FP64 otherwise.
bool accumulates_in_float(const PrecisionSpec& spec);

/// Strategy-aware reduction of `terms` (used by checksums and row sums):
/// accumulates in the spec's accumulation precision and order. No output
/// quantization.
double reduce_in_precision(std::span<const double> terms, const PrecisionSpec& spec);

/// Reductions in an explicit working type, for callers that form the terms
/// in that precision themselves.
float reduce(std::span<const float> terms, AccumStrategy strat);
double reduce(std::span<const double> terms, AccumStrategy strat);

} // namespace vabft
