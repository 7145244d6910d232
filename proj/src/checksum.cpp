#include "vabft/checksum.hpp"

#include <cmath>
#include <stdexcept>

namespace vabft {

const char* verify_mode_name(VerifyMode m) {
    return m == VerifyMode::Offline ? "offline" : "online";
}

VerifyMode verify_mode_from_name(const std::string& name) {
    if (name == "offline") return VerifyMode::Offline;
    if (name == "online") return VerifyMode::Online;
    throw std::invalid_argument("unknown mode: " + name);
}

PrecisionSpec checksum_precision_for(const PrecisionSpec& fmt, VerifyMode mode) {
    if (mode == VerifyMode::Offline) return fmt;
    // Online verification stays in the accumulator precision.
    PrecisionSpec base =
        fmt.format == Format::FP64 ? PrecisionSpec::fp64() : PrecisionSpec::fp32();
    return base.with_accumulation(fmt.accumulation);
}

ChecksumVectors ChecksumVectors::make(int64_t n, const PrecisionSpec& accum_precision) {
    if (n < 1) throw std::invalid_argument("ChecksumVectors: length must be >= 1");
    const int t = accumulates_in_float(accum_precision) ? 24 : 53;
    if (n > (int64_t(1) << t))
        throw std::invalid_argument(
            "ChecksumVectors: position weights exceed the exact-integer range "
            "of the checksum precision");
    return ChecksumVectors{n};
}

std::vector<double> ChecksumVectors::ones() const {
    return std::vector<double>(size_t(n), 1.0);
}

std::vector<double> ChecksumVectors::weights() const {
    std::vector<double> w(static_cast<size_t>(n));
    for (int64_t k = 0; k < n; ++k) w[size_t(k)] = weight(k);
    return w;
}

namespace {

// Checksum pipeline in an explicit working type T: products are rounded in
// T, reductions follow the strategy.
template <typename T>
struct ChecksumEngine {
    AccumStrategy strat;

    // sum_j m(i, j) for every i along the given axis
    std::vector<double> plain(const Matrix& m, bool over_cols) const {
        return weighted_impl(m, over_cols, false);
    }
    // sum_j w(j) * m(i, j)
    std::vector<double> position_weighted(const Matrix& m, bool over_cols) const {
        return weighted_impl(m, over_cols, true);
    }
    // out[i] = sum_k lhs[k] * m(i, k)  (over_cols) or sum_k lhs[k] * m(k, i)
    std::vector<double> contract(std::span<const double> lhs, const Matrix& m,
                                 bool over_cols) const {
        const int64_t out_len = over_cols ? m.rows() : m.cols();
        const int64_t k_len = over_cols ? m.cols() : m.rows();
        if (int64_t(lhs.size()) != k_len)
            throw std::invalid_argument("checksum contract: length mismatch");
        std::vector<double> out(static_cast<size_t>(out_len));
        std::vector<T> terms(static_cast<size_t>(k_len));
        for (int64_t i = 0; i < out_len; ++i) {
            for (int64_t k = 0; k < k_len; ++k) {
                const T lv = T(lhs[size_t(k)]);
                const T mv = T(over_cols ? m(i, k) : m(k, i));
                terms[size_t(k)] = lv * mv;
            }
            out[size_t(i)] = double(reduce(std::span<const T>(terms), strat));
        }
        return out;
    }

private:
    std::vector<double> weighted_impl(const Matrix& m, bool over_cols, bool weighted) const {
        const int64_t out_len = over_cols ? m.rows() : m.cols();
        const int64_t k_len = over_cols ? m.cols() : m.rows();
        std::vector<double> out(static_cast<size_t>(out_len));
        std::vector<T> terms(static_cast<size_t>(k_len));
        for (int64_t i = 0; i < out_len; ++i) {
            for (int64_t k = 0; k < k_len; ++k) {
                const T mv = T(over_cols ? m(i, k) : m(k, i));
                terms[size_t(k)] = weighted ? T(ChecksumVectors::weight(k)) * mv : mv;
            }
            out[size_t(i)] = double(reduce(std::span<const T>(terms), strat));
        }
        return out;
    }
};

void quantize_all(std::vector<double>& v, const PrecisionSpec& fmt) {
    for (double& x : v) x = quantize(x, fmt);
}

template <typename T>
EncodedProduct encode_impl(const Matrix& a, const Matrix& b, VerifyMode mode,
                           const PrecisionSpec& cs_prec, GemmResult&& gemm) {
    const ChecksumEngine<T> eng{cs_prec.accumulation};
    const bool round_checksums = mode == VerifyMode::Offline;

    // Row checksums: encode B first (B r1, B r2), then contract with A.
    std::vector<double> br1 = eng.plain(b, true);
    std::vector<double> br2 = eng.position_weighted(b, true);
    if (round_checksums) {
        quantize_all(br1, a.format());
        quantize_all(br2, a.format());
    }
    std::vector<double> cr1 = eng.contract(br1, a, true);
    std::vector<double> cr2 = eng.contract(br2, a, true);

    // Column checksums: encode A (c1 A, c2 A), then contract with B.
    std::vector<double> ac1 = eng.plain(a, false);
    std::vector<double> ac2 = eng.position_weighted(a, false);
    if (round_checksums) {
        quantize_all(ac1, a.format());
        quantize_all(ac2, a.format());
    }
    std::vector<double> cc1 = eng.contract(ac1, b, false);
    std::vector<double> cc2 = eng.contract(ac2, b, false);

    if (round_checksums) {
        quantize_all(cr1, a.format());
        quantize_all(cr2, a.format());
        quantize_all(cc1, a.format());
        quantize_all(cc2, a.format());
    }

    EncodedProduct out;
    out.c = std::move(gemm.c);
    out.c_accum = std::move(gemm.accum);
    out.row_check1 = std::move(cr1);
    out.row_check2 = std::move(cr2);
    out.col_check1 = std::move(cc1);
    out.col_check2 = std::move(cc2);
    out.checksum_precision = cs_prec;
    out.mode = mode;
    return out;
}

} // namespace

EncodedProduct encode_and_multiply(const Matrix& a, const Matrix& b, VerifyMode mode) {
    GemmResult gemm = gemm_emulated_with_accum(a, b);
    const PrecisionSpec cs_prec = checksum_precision_for(a.format(), mode);
    ChecksumVectors::make(b.cols(), cs_prec);
    ChecksumVectors::make(a.rows(), cs_prec);
    if (accumulates_in_float(cs_prec))
        return encode_impl<float>(a, b, mode, cs_prec, std::move(gemm));
    return encode_impl<double>(a, b, mode, cs_prec, std::move(gemm));
}

namespace {

template <typename T>
std::pair<std::vector<double>, std::vector<double>> row_sums_impl(
    const Matrix& c, const AccumStrategy& strat) {
    std::vector<double> r1(size_t(c.rows())), r2(size_t(c.rows()));
    std::vector<T> plain(size_t(c.cols())), weighted(size_t(c.cols()));
    for (int64_t i = 0; i < c.rows(); ++i) {
        for (int64_t j = 0; j < c.cols(); ++j) {
            const T v = T(c(i, j));
            plain[size_t(j)] = v;
            weighted[size_t(j)] = T(ChecksumVectors::weight(j)) * v;
        }
        r1[size_t(i)] = double(reduce(std::span<const T>(plain), strat));
        r2[size_t(i)] = double(reduce(std::span<const T>(weighted), strat));
    }
    return {std::move(r1), std::move(r2)};
}

} // namespace

std::pair<std::vector<double>, std::vector<double>> row_sums(
    const Matrix& c, const PrecisionSpec& sum_precision) {
    ChecksumVectors::make(c.cols(), sum_precision);
    if (accumulates_in_float(sum_precision))
        return row_sums_impl<float>(c, sum_precision.accumulation);
    return row_sums_impl<double>(c, sum_precision.accumulation);
}

} // namespace vabft
