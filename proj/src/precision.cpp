#include "vabft/precision.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

namespace vabft {

const char* format_name(Format f) {
    switch (f) {
        case Format::BF16: return "bf16";
        case Format::FP16: return "fp16";
        case Format::FP32: return "fp32";
        case Format::FP64: return "fp64";
    }
    return "?";
}

Format format_from_name(const std::string& name) {
    if (name == "bf16") return Format::BF16;
    if (name == "fp16") return Format::FP16;
    if (name == "fp32") return Format::FP32;
    if (name == "fp64") return Format::FP64;
    throw std::invalid_argument("unknown precision: " + name);
}

std::string AccumStrategy::describe() const {
    switch (kind) {
        case AccumKind::Fp32AccumRoundOutput: return "fp32-accum";
        case AccumKind::NativeSequential: return "sequential";
        case AccumKind::NativeBlocked: return "blocked:" + std::to_string(block_len);
        case AccumKind::NativePairwise: return "pairwise";
    }
    return "?";
}

double EmaxModel::resolve(int64_t dim) const {
    if (kind == Kind::Constant) return offset;
    return scale * std::sqrt(double(dim)) + offset;
}

PrecisionSpec PrecisionSpec::bf16() {
    PrecisionSpec s;
    s.format = Format::BF16;
    s.mantissa_bits = 8;
    s.unit_roundoff = 0x1.0p-8;
    s.accumulation = {AccumKind::Fp32AccumRoundOutput, 128};
    s.e_max_model = EmaxModel::constant(8e-3);
    return s;
}

PrecisionSpec PrecisionSpec::fp16() {
    PrecisionSpec s;
    s.format = Format::FP16;
    s.mantissa_bits = 11;
    s.unit_roundoff = 0x1.0p-11;
    s.accumulation = {AccumKind::Fp32AccumRoundOutput, 128};
    s.e_max_model = EmaxModel::constant(1e-3);
    return s;
}

PrecisionSpec PrecisionSpec::fp32() {
    PrecisionSpec s;
    s.format = Format::FP32;
    s.mantissa_bits = 24;
    s.unit_roundoff = 0x1.0p-24;
    s.accumulation = {AccumKind::NativePairwise, 128};
    s.e_max_model = EmaxModel::sqrt_scaled(5.0e-9, 1.2e-7);
    return s;
}

PrecisionSpec PrecisionSpec::fp64() {
    PrecisionSpec s;
    s.format = Format::FP64;
    s.mantissa_bits = 53;
    s.unit_roundoff = 0x1.0p-53;
    s.accumulation = {AccumKind::NativePairwise, 128};
    s.e_max_model = EmaxModel::sqrt_scaled(1.0e-17, 2.5e-16);
    return s;
}

PrecisionSpec PrecisionSpec::of(Format f) {
    switch (f) {
        case Format::BF16: return bf16();
        case Format::FP16: return fp16();
        case Format::FP32: return fp32();
        case Format::FP64: return fp64();
    }
    throw std::invalid_argument("bad format");
}

int PrecisionSpec::min_normal_exponent() const {
    switch (format) {
        case Format::BF16: return -126;
        case Format::FP16: return -14;
        case Format::FP32: return -126;
        case Format::FP64: return -1022;
    }
    return 0;
}

double PrecisionSpec::max_finite() const {
    switch (format) {
        case Format::BF16: return 0x1.FEp127;
        case Format::FP16: return 65504.0;
        case Format::FP32: return double(std::numeric_limits<float>::max());
        case Format::FP64: return std::numeric_limits<double>::max();
    }
    return 0;
}

double PrecisionSpec::min_subnormal() const {
    // 2^(emin - t + 1)
    return std::ldexp(1.0, min_normal_exponent() - mantissa_bits + 1);
}

int PrecisionSpec::bit_width() const {
    switch (format) {
        case Format::BF16:
        case Format::FP16: return 16;
        case Format::FP32: return 32;
        case Format::FP64: return 64;
    }
    return 0;
}

double quantize(double x, const PrecisionSpec& fmt) {
    if (!std::isfinite(x)) throw std::domain_error("quantize: non-finite input");
    if (fmt.format == Format::FP64 || x == 0.0) return x;

    const int t = fmt.mantissa_bits;
    const int emin = fmt.min_normal_exponent();
    const int shift = 53 - t;
    const uint64_t bits = std::bit_cast<uint64_t>(x);
    const int biased = int((bits >> 52) & 0x7FF);

    double y;
    if (biased != 0 && biased - 1023 >= emin) {
        // Round-to-nearest-even on the significand: add half-ulp plus the
        // target lsb, then truncate. Carries propagate into the exponent.
        const uint64_t mask = (uint64_t(1) << shift) - 1;
        const uint64_t lsb = (bits >> shift) & 1;
        y = std::bit_cast<double>((bits + (mask >> 1) + lsb) & ~mask);
    } else {
        // Subnormal range: fixed quantum grid. The scaling by a power of
        // two is exact, nearbyint honors ties-to-even.
        const double quantum = fmt.min_subnormal();
        y = std::nearbyint(x / quantum) * quantum;
    }

    if (std::abs(y) > fmt.max_finite()) {
        if (fmt.overflow == OverflowPolicy::Error)
            throw std::range_error("quantize: overflow beyond max finite value");
        y = std::copysign(fmt.max_finite(), x);
    }
    return y;
}

Matrix::Matrix(int64_t rows, int64_t cols, PrecisionSpec fmt)
    : rows_(rows), cols_(cols), fmt_(fmt), data_(size_t(rows * cols), 0.0) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("Matrix: dims must be >= 1");
}

Matrix Matrix::from_values(int64_t rows, int64_t cols, std::span<const double> values,
                           PrecisionSpec fmt, bool quantize_values) {
    if (int64_t(values.size()) != rows * cols)
        throw std::invalid_argument("Matrix::from_values: size mismatch");
    Matrix m(rows, cols, fmt);
    for (size_t idx = 0; idx < values.size(); ++idx) {
        const double q = quantize(values[idx], fmt);
        if (!quantize_values && q != values[idx])
            throw std::invalid_argument("Matrix::from_values: value not representable in format");
        m.data_[idx] = q;
    }
    return m;
}

Matrix Matrix::identity(int64_t n, PrecisionSpec fmt) {
    Matrix m(n, n, fmt);
    for (int64_t i = 0; i < n; ++i) m.data_[i * n + i] = 1.0;
    return m;
}

double Matrix::at(int64_t i, int64_t j) const {
    if (i < 0 || i >= rows_ || j < 0 || j >= cols_)
        throw std::out_of_range("Matrix::at: index out of range");
    return data_[i * cols_ + j];
}

void Matrix::set(int64_t i, int64_t j, double v) {
    if (i < 0 || i >= rows_ || j < 0 || j >= cols_)
        throw std::out_of_range("Matrix::set: index out of range");
    data_[i * cols_ + j] = quantize(v, fmt_);
}

bool Matrix::same_bits(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ &&
           std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(double)) == 0;
}

bool accumulates_in_float(const PrecisionSpec& spec) {
    if (spec.accumulation.kind == AccumKind::Fp32AccumRoundOutput) return true;
    return spec.format == Format::FP32;
}

namespace {

constexpr int64_t kColBlock = 128;

template <typename T>
struct GemmCtx {
    const T* a;       // M x K
    const T* b;       // K x N
    int64_t k_len;
    int64_t n_len;
};

// Balanced binary reduction over [k0, k1) for one row of A and one column
// block; each combine is a single rounded add per lane.
template <typename T>
void pairwise_block(const GemmCtx<T>& ctx, const T* arow, int64_t n0, int64_t nb,
                    int64_t k0, int64_t k1, T* out) {
    if (k1 - k0 == 1) {
        const T av = arow[k0];
        const T* brow = ctx.b + k0 * ctx.n_len + n0;
        for (int64_t j = 0; j < nb; ++j) out[j] = av * brow[j];
        return;
    }
    const int64_t mid = k0 + (k1 - k0) / 2;
    pairwise_block(ctx, arow, n0, nb, k0, mid, out);
    T tmp[kColBlock];
    pairwise_block(ctx, arow, n0, nb, mid, k1, tmp);
    for (int64_t j = 0; j < nb; ++j) out[j] += tmp[j];
}

template <typename T>
void gemm_row_block(const GemmCtx<T>& ctx, const T* arow, int64_t n0, int64_t nb,
                    AccumStrategy strat, T* out) {
    const int64_t k_len = ctx.k_len;
    switch (strat.kind) {
        case AccumKind::Fp32AccumRoundOutput:
        case AccumKind::NativeSequential: {
            for (int64_t j = 0; j < nb; ++j) out[j] = T(0);
            for (int64_t k = 0; k < k_len; ++k) {
                const T av = arow[k];
                const T* brow = ctx.b + k * ctx.n_len + n0;
                for (int64_t j = 0; j < nb; ++j) out[j] += av * brow[j];
            }
            break;
        }
        case AccumKind::NativeBlocked: {
            const int64_t bl = strat.block_len > 0 ? strat.block_len : 128;
            T part[kColBlock];
            for (int64_t j = 0; j < nb; ++j) out[j] = T(0);
            for (int64_t j = 0; j < nb; ++j) part[j] = T(0);
            for (int64_t k = 0; k < k_len; ++k) {
                const T av = arow[k];
                const T* brow = ctx.b + k * ctx.n_len + n0;
                for (int64_t j = 0; j < nb; ++j) part[j] += av * brow[j];
                if ((k + 1) % bl == 0 || k + 1 == k_len) {
                    for (int64_t j = 0; j < nb; ++j) {
                        out[j] += part[j];
                        part[j] = T(0);
                    }
                }
            }
            break;
        }
        case AccumKind::NativePairwise:
            pairwise_block(ctx, arow, n0, nb, 0, k_len, out);
            break;
    }
}

template <typename T>
std::vector<T> to_working(const Matrix& m) {
    std::vector<T> out(m.values().size());
    const double* src = m.values().data();
    for (size_t i = 0; i < out.size(); ++i) out[i] = T(src[i]);
    return out;
}

template <typename T>
void run_gemm(const Matrix& a, const Matrix& b, const PrecisionSpec& outfmt,
              const PrecisionSpec& accfmt, Matrix& c, Matrix& accum) {
    const int64_t m_len = a.rows(), k_len = a.cols(), n_len = b.cols();
    const std::vector<T> aw = to_working<T>(a);
    const std::vector<T> bw = to_working<T>(b);
    const GemmCtx<T> ctx{aw.data(), bw.data(), k_len, n_len};
    const AccumStrategy strat = a.format().accumulation;
    const bool needs_round = outfmt.format != accfmt.format;

    T out[kColBlock];
    for (int64_t i = 0; i < m_len; ++i) {
        const T* arow = aw.data() + i * k_len;
        for (int64_t n0 = 0; n0 < n_len; n0 += kColBlock) {
            const int64_t nb = std::min(kColBlock, n_len - n0);
            gemm_row_block(ctx, arow, n0, nb, strat, out);
            for (int64_t j = 0; j < nb; ++j) {
                const double acc = double(out[j]);
                if (!std::isfinite(acc)) {
                    if (outfmt.overflow == OverflowPolicy::Error)
                        throw std::range_error("gemm_emulated: accumulator overflow");
                    const double sat = std::copysign(outfmt.max_finite(), acc);
                    accum.set_raw(i, n0 + j, sat);
                    c.set_raw(i, n0 + j, sat);
                    continue;
                }
                accum.set_raw(i, n0 + j, acc);
                c.set_raw(i, n0 + j, needs_round ? quantize(acc, outfmt) : acc);
            }
        }
    }
}

} // namespace

GemmResult gemm_emulated_with_accum(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw std::invalid_argument("gemm_emulated: inner dimensions disagree");
    if (a.format().format != b.format().format)
        throw std::invalid_argument("gemm_emulated: operand formats disagree");
    const PrecisionSpec& spec = a.format();
    if ((spec.format == Format::BF16 || spec.format == Format::FP16) &&
        spec.accumulation.kind != AccumKind::Fp32AccumRoundOutput)
        throw std::invalid_argument("gemm_emulated: 16-bit formats require fp32 accumulation");

    const bool in_float = accumulates_in_float(spec);
    const PrecisionSpec accfmt = in_float ? PrecisionSpec::fp32() : PrecisionSpec::fp64();
    GemmResult r{Matrix(a.rows(), b.cols(), spec), Matrix(a.rows(), b.cols(), accfmt)};
    if (in_float)
        run_gemm<float>(a, b, spec, accfmt, r.c, r.accum);
    else
        run_gemm<double>(a, b, spec, accfmt, r.c, r.accum);
    return r;
}

Matrix gemm_emulated(const Matrix& a, const Matrix& b) {
    return gemm_emulated_with_accum(a, b).c;
}

namespace {

template <typename T>
T pairwise_sum(const T* v, int64_t n) {
    if (n == 1) return v[0];
    if (n == 2) return v[0] + v[1];
    const int64_t mid = n / 2;
    return pairwise_sum(v, mid) + pairwise_sum(v + mid, n - mid);
}

template <typename T>
T reduce_terms(std::span<const T> terms, AccumStrategy strat) {
    const int64_t n = int64_t(terms.size());
    if (n == 0) return T(0);
    switch (strat.kind) {
        case AccumKind::Fp32AccumRoundOutput:
        case AccumKind::NativeSequential: {
            T acc = T(0);
            for (int64_t i = 0; i < n; ++i) acc += terms[i];
            return acc;
        }
        case AccumKind::NativeBlocked: {
            const int64_t bl = strat.block_len > 0 ? strat.block_len : 128;
            T tot = T(0), part = T(0);
            for (int64_t i = 0; i < n; ++i) {
                part += terms[i];
                if ((i + 1) % bl == 0 || i + 1 == n) {
                    tot += part;
                    part = T(0);
                }
            }
            return tot;
        }
        case AccumKind::NativePairwise:
            return pairwise_sum(terms.data(), n);
    }
    return T(0);
}

} // namespace

double reduce_in_precision(std::span<const double> terms, const PrecisionSpec& spec) {
    if (accumulates_in_float(spec)) {
        std::vector<float> f(terms.size());
        for (size_t i = 0; i < terms.size(); ++i) f[i] = float(terms[i]);
        return double(reduce_terms<float>(f, spec.accumulation));
    }
    return reduce_terms<double>(terms, spec.accumulation);
}

float reduce(std::span<const float> terms, AccumStrategy strat) {
    return reduce_terms<float>(terms, strat);
}

double reduce(std::span<const double> terms, AccumStrategy strat) {
    return reduce_terms<double>(terms, strat);
}

} // namespace vabft
