#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "vabft/precision.hpp"

namespace vabft {

/// Working precision of the reference arithmetic: 352 bits is a little over
/// 105 decimal digits.
inline constexpr int kOracleBits = 352;

class OracleMatrix;

/// Arbitrary-precision real (MPFR under the hood), fixed working precision.
class BigReal {
public:
    explicit BigReal(int prec_bits = kOracleBits);
    explicit BigReal(double v, int prec_bits = kOracleBits);
    explicit BigReal(const std::string& decimal, int prec_bits = kOracleBits);
    BigReal(const BigReal&);
    BigReal(BigReal&&) noexcept;
    BigReal& operator=(const BigReal&);
    BigReal& operator=(BigReal&&) noexcept;
    ~BigReal();

    BigReal& operator+=(const BigReal&);
    BigReal& operator+=(double);
    BigReal& operator-=(const BigReal&);
    BigReal& operator*=(const BigReal&);
    BigReal& operator*=(double);

    BigReal abs() const;
    double to_double() const;
    int compare(const BigReal&) const;

    /// |*this - ref| / |ref|, evaluated at working precision.
    double relative_difference_from(const BigReal& ref) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    friend class OracleMatrix;
    friend BigReal oracle_dot(std::span<const double>, std::span<const double>, int);
    friend OracleMatrix gemm_oracle(const Matrix&, const Matrix&, int);
};

/// Product of two stored matrices evaluated at oracle precision.
class OracleMatrix {
public:
    OracleMatrix(int64_t rows, int64_t cols, int prec_bits = kOracleBits);

    int64_t rows() const { return rows_; }
    int64_t cols() const { return cols_; }

    double to_double(int64_t i, int64_t j) const;
    const BigReal& at(int64_t i, int64_t j) const;
    BigReal& at(int64_t i, int64_t j);

    /// Sum of row i (plain or position-weighted w(j) = j+1), full precision.
    BigReal row_sum(int64_t i, bool weighted = false) const;

    /// Matrix of entries rounded to double.
    Matrix rounded(const PrecisionSpec& fmt) const;

private:
    int64_t rows_, cols_;
    int prec_;
    std::vector<BigReal> cells_;
};

OracleMatrix gemm_oracle(const Matrix& a, const Matrix& b, int prec_bits = kOracleBits);

/// Exact-in-effect dot product of two double vectors at oracle precision.
BigReal oracle_dot(std::span<const double> x, std::span<const double> y,
                   int prec_bits = kOracleBits);

/// Sum of row i of C at oracle precision, optionally weighted by w(j)=j+1.
BigReal oracle_row_sum(const Matrix& c, int64_t i, bool weighted = false,
                       int prec_bits = kOracleBits);

/// Per-row |checksum[i] - sum_j C(i,j)| with the subtraction done at oracle
/// precision. This is the "actual verification difference" used by the
/// tightness experiments.
std::vector<double> oracle_row_diffs(std::span<const double> checksums, const Matrix& c,
                                     int prec_bits = kOracleBits);

} // namespace vabft
