#pragma once

#include <utility>
#include <vector>

#include "vabft/precision.hpp"

namespace vabft {

enum class VerifyMode : uint8_t { Offline, Online };

const char* verify_mode_name(VerifyMode m);
VerifyMode verify_mode_from_name(const std::string& name);

/// Precision the checksums and verification sums live in: the output
/// format itself for Offline, FP32-or-better (the accumulator precision)
/// for Online.
PrecisionSpec checksum_precision_for(const PrecisionSpec& fmt, VerifyMode mode);

/// The ABFT encoding vectors are implicit: r1/c1 are all ones and the
/// position weights are w(k) = k+1. This helper materializes them and
/// validates that every weight is exactly representable in the precision
/// the checksums accumulate in.
struct ChecksumVectors {
    int64_t n = 0; // length of the weighted vector
    static double weight(int64_t k) { return double(k + 1); }
    static ChecksumVectors make(int64_t n, const PrecisionSpec& accum_precision);
    std::vector<double> ones() const;
    std::vector<double> weights() const;
};

/// Checksummed product. For Online mode the verification side reads the
/// pre-quantization accumulator (c_accum); Offline verifies the quantized
/// output the consumer sees.
struct EncodedProduct {
    Matrix c;
    std::vector<double> row_check1; // A * (B r1), length M
    std::vector<double> row_check2; // A * (B r2), length M
    std::vector<double> col_check1; // (c1 A) * B, length N
    std::vector<double> col_check2; // (c2 A) * B, length N
    PrecisionSpec checksum_precision;
    VerifyMode mode = VerifyMode::Offline;
    Matrix c_accum;

    const Matrix& verification_source() const {
        return mode == VerifyMode::Online ? c_accum : c;
    }
};

/// Computes C = A*B under the emulated arithmetic together with row and
/// column checksums. Checksums always come from the encoded operands
/// (B r first, then A*(B r)), never from C.
EncodedProduct encode_and_multiply(const Matrix& a, const Matrix& b,
                                   VerifyMode mode = VerifyMode::Offline);

/// Post-hoc row sums C*r1 and C*r2, accumulated in sum_precision's
/// accumulation arithmetic with the deterministic order of its strategy.
std::pair<std::vector<double>, std::vector<double>> row_sums(
    const Matrix& c, const PrecisionSpec& sum_precision);

} // namespace vabft
