#include "vabft/oracle.hpp"

#include <mpfr.h>

#include <stdexcept>

namespace vabft {

struct BigReal::Impl {
    mpfr_t v;
    explicit Impl(int prec) { mpfr_init2(v, prec); }
    ~Impl() { mpfr_clear(v); }
};

BigReal::BigReal(int prec_bits) : impl_(std::make_unique<Impl>(prec_bits)) {
    mpfr_set_zero(impl_->v, 1);
}

BigReal::BigReal(double v, int prec_bits) : impl_(std::make_unique<Impl>(prec_bits)) {
    mpfr_set_d(impl_->v, v, MPFR_RNDN);
}

BigReal::BigReal(const std::string& decimal, int prec_bits)
    : impl_(std::make_unique<Impl>(prec_bits)) {
    if (mpfr_set_str(impl_->v, decimal.c_str(), 10, MPFR_RNDN) != 0)
        throw std::invalid_argument("BigReal: cannot parse '" + decimal + "'");
}

BigReal::BigReal(const BigReal& o) : impl_(std::make_unique<Impl>(mpfr_get_prec(o.impl_->v))) {
    mpfr_set(impl_->v, o.impl_->v, MPFR_RNDN);
}

BigReal::BigReal(BigReal&&) noexcept = default;

BigReal& BigReal::operator=(const BigReal& o) {
    if (this != &o) {
        impl_ = std::make_unique<Impl>(mpfr_get_prec(o.impl_->v));
        mpfr_set(impl_->v, o.impl_->v, MPFR_RNDN);
    }
    return *this;
}

BigReal& BigReal::operator=(BigReal&&) noexcept = default;
BigReal::~BigReal() = default;

BigReal& BigReal::operator+=(const BigReal& o) {
    mpfr_add(impl_->v, impl_->v, o.impl_->v, MPFR_RNDN);
    return *this;
}

BigReal& BigReal::operator+=(double d) {
    mpfr_add_d(impl_->v, impl_->v, d, MPFR_RNDN);
    return *this;
}

BigReal& BigReal::operator-=(const BigReal& o) {
    mpfr_sub(impl_->v, impl_->v, o.impl_->v, MPFR_RNDN);
    return *this;
}

BigReal& BigReal::operator*=(const BigReal& o) {
    mpfr_mul(impl_->v, impl_->v, o.impl_->v, MPFR_RNDN);
    return *this;
}

BigReal& BigReal::operator*=(double d) {
    mpfr_mul_d(impl_->v, impl_->v, d, MPFR_RNDN);
    return *this;
}

BigReal BigReal::abs() const {
    BigReal r(int(mpfr_get_prec(impl_->v)));
    mpfr_abs(r.impl_->v, impl_->v, MPFR_RNDN);
    return r;
}

double BigReal::to_double() const { return mpfr_get_d(impl_->v, MPFR_RNDN); }

int BigReal::compare(const BigReal& o) const { return mpfr_cmp(impl_->v, o.impl_->v); }

double BigReal::relative_difference_from(const BigReal& ref) const {
    const int prec = int(mpfr_get_prec(impl_->v));
    mpfr_t diff;
    mpfr_init2(diff, prec);
    mpfr_sub(diff, impl_->v, ref.impl_->v, MPFR_RNDN);
    mpfr_abs(diff, diff, MPFR_RNDN);
    mpfr_t den;
    mpfr_init2(den, prec);
    mpfr_abs(den, ref.impl_->v, MPFR_RNDN);
    mpfr_div(diff, diff, den, MPFR_RNDN);
    const double out = mpfr_get_d(diff, MPFR_RNDN);
    mpfr_clear(diff);
    mpfr_clear(den);
    return out;
}

OracleMatrix::OracleMatrix(int64_t rows, int64_t cols, int prec_bits)
    : rows_(rows), cols_(cols), prec_(prec_bits) {
    cells_.reserve(size_t(rows * cols));
    for (int64_t i = 0; i < rows * cols; ++i) cells_.emplace_back(prec_bits);
}

double OracleMatrix::to_double(int64_t i, int64_t j) const {
    return cells_[size_t(i * cols_ + j)].to_double();
}

const BigReal& OracleMatrix::at(int64_t i, int64_t j) const {
    return cells_[size_t(i * cols_ + j)];
}

BigReal& OracleMatrix::at(int64_t i, int64_t j) {
    return cells_[size_t(i * cols_ + j)];
}

BigReal OracleMatrix::row_sum(int64_t i, bool weighted) const {
    BigReal acc(prec_);
    for (int64_t j = 0; j < cols_; ++j) {
        if (weighted) {
            BigReal term = at(i, j);
            term *= double(j + 1);
            acc += term;
        } else {
            acc += at(i, j);
        }
    }
    return acc;
}

Matrix OracleMatrix::rounded(const PrecisionSpec& fmt) const {
    Matrix m(rows_, cols_, fmt);
    for (int64_t i = 0; i < rows_; ++i)
        for (int64_t j = 0; j < cols_; ++j) m.set(i, j, to_double(i, j));
    return m;
}

OracleMatrix gemm_oracle(const Matrix& a, const Matrix& b, int prec_bits) {
    if (a.cols() != b.rows())
        throw std::invalid_argument("gemm_oracle: inner dimensions disagree");
    const int64_t m_len = a.rows(), k_len = a.cols(), n_len = b.cols();
    OracleMatrix out(m_len, n_len, prec_bits);

    mpfr_t term, acc;
    mpfr_init2(term, prec_bits);
    mpfr_init2(acc, prec_bits);
    for (int64_t i = 0; i < m_len; ++i) {
        for (int64_t j = 0; j < n_len; ++j) {
            mpfr_set_zero(acc, 1);
            for (int64_t k = 0; k < k_len; ++k) {
                mpfr_set_d(term, a(i, k), MPFR_RNDN);
                mpfr_mul_d(term, term, b(k, j), MPFR_RNDN);
                mpfr_add(acc, acc, term, MPFR_RNDN);
            }
            mpfr_set(out.at(i, j).impl_->v, acc, MPFR_RNDN);
        }
    }
    mpfr_clear(term);
    mpfr_clear(acc);
    return out;
}

BigReal oracle_dot(std::span<const double> x, std::span<const double> y, int prec_bits) {
    if (x.size() != y.size()) throw std::invalid_argument("oracle_dot: length mismatch");
    BigReal acc(prec_bits);
    mpfr_t term;
    mpfr_init2(term, prec_bits);
    for (size_t k = 0; k < x.size(); ++k) {
        mpfr_set_d(term, x[k], MPFR_RNDN);
        mpfr_mul_d(term, term, y[k], MPFR_RNDN);
        mpfr_add(acc.impl_->v, acc.impl_->v, term, MPFR_RNDN);
    }
    mpfr_clear(term);
    return acc;
}

BigReal oracle_row_sum(const Matrix& c, int64_t i, bool weighted, int prec_bits) {
    BigReal acc(prec_bits);
    for (int64_t j = 0; j < c.cols(); ++j) {
        if (weighted) {
            BigReal term(c(i, j), prec_bits);
            term *= double(j + 1);
            acc += term;
        } else {
            acc += c(i, j);
        }
    }
    return acc;
}

std::vector<double> oracle_row_diffs(std::span<const double> checksums, const Matrix& c,
                                     int prec_bits) {
    if (int64_t(checksums.size()) != c.rows())
        throw std::invalid_argument("oracle_row_diffs: checksum length mismatch");
    std::vector<double> out(checksums.size());
    mpfr_t acc;
    mpfr_init2(acc, prec_bits);
    for (int64_t i = 0; i < c.rows(); ++i) {
        mpfr_set_zero(acc, 1);
        for (int64_t j = 0; j < c.cols(); ++j)
            mpfr_add_d(acc, acc, c(i, j), MPFR_RNDN);
        mpfr_d_sub(acc, checksums[size_t(i)], acc, MPFR_RNDN);
        mpfr_abs(acc, acc, MPFR_RNDN);
        out[size_t(i)] = mpfr_get_d(acc, MPFR_RNDN);
    }
    mpfr_clear(acc);
    return out;
}

} // namespace vabft
