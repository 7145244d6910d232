#pragma once

#include <vector>

#include "vabft/precision.hpp"
#include "vabft/stats.hpp"

namespace vabft {

struct VabftParams {
    double e_max = 0.0;
    double c_sigma = 2.5;
};

/// The three components of the per-row bound; total is
/// e_max * (det + var23 + var4) exactly as computed.
struct ThresholdBreakdown {
    double det = 0.0;
    double var23 = 0.0;
    double var4 = 0.0;
    double total = 0.0;
};

/// Per-row stats of B, computed once and shared across all rows of A.
std::vector<RowStats> precompute_b_stats(const Matrix& b);

/// Sums over the B stats the formula needs; O(1) per row of A afterwards.
struct BStatsSummary {
    double sum_abs_mean = 0.0; // sum_k |mu_Bk|
    double sum_mean_sq = 0.0;  // sum_k mu_Bk^2
    double sum_var = 0.0;      // sum_k sigma_Bk^2 (extrema bounds)
    int64_t k_len = 0;
    static BStatsSummary from(std::span<const RowStats> b_stats);
};

ThresholdBreakdown threshold_row(const RowStats& a_stats, const BStatsSummary& b,
                                 int64_t n, const VabftParams& params);
ThresholdBreakdown threshold_row(const RowStats& a_stats, std::span<const RowStats> b_stats,
                                 int64_t n, const VabftParams& params);

/// e_max for the accumulation length actually in use.
double resolve_e_max(const PrecisionSpec& spec, int64_t dim);

/// Convenience: per-row thresholds for verifying A*B. The e_max in params
/// is used as-is (callers resolve models beforehand).
std::vector<double> vabft_thresholds(const Matrix& a, const Matrix& b,
                                     const VabftParams& params);

} // namespace vabft
