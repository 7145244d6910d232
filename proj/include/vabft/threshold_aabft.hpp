#pragma once

#include <optional>
#include <vector>

#include "vabft/precision.hpp"

namespace vabft {

/// Baseline probabilistic threshold for inner products. The mantissa-bit
/// convention follows the original formulation (t = 53 for FP64, 23 for
/// FP32); for the 16-bit formats we use the u = 2^-t convention (t = 8 for
/// BF16, 11 for FP16), which is what reproduces the published values.
struct AabftParams {
    int mantissa_bits = 53;
    std::optional<double> fixed_y = 21.0; // nullopt selects computed y
    double confidence_multiplier = 3.0;

    static AabftParams for_format(Format f);
    bool computed_y() const { return !fixed_y.has_value(); }
};

/// sqrt((n(n+1)(n+0.5) + 2n) / 24) * 2^-t * y
double aabft_sigma(int64_t n, int mantissa_bits, double y);

struct AabftThresholds {
    std::vector<double> per_row; // identical entries: the bound is row-independent
    double y_used = 0.0;
    bool degenerate = false; // computed y was zero
};

/// Thresholds for verifying A*B with n = K (the accumulation length).
/// Computed y = max|A| * max_k |sum_j B[k][j]|.
AabftThresholds aabft_threshold(const Matrix& a, const Matrix& b, const AabftParams& params);

double aabft_computed_y(const Matrix& a, const Matrix& b);

} // namespace vabft
