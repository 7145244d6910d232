#include "vabft/threshold_vabft.hpp"

#include <cmath>
#include <stdexcept>

namespace vabft {

std::vector<RowStats> precompute_b_stats(const Matrix& b) {
    std::vector<RowStats> out;
    out.reserve(size_t(b.rows()));
    for (int64_t k = 0; k < b.rows(); ++k) out.push_back(row_stats(b.row(k)));
    return out;
}

BStatsSummary BStatsSummary::from(std::span<const RowStats> b_stats) {
    if (b_stats.empty()) throw std::invalid_argument("BStatsSummary: empty stats");
    BStatsSummary s;
    s.k_len = int64_t(b_stats.size());
    for (const RowStats& r : b_stats) {
        if (r.var_bound < 0.0) throw std::logic_error("BStatsSummary: negative variance bound");
        s.sum_abs_mean += std::abs(r.mean);
        s.sum_mean_sq += r.mean * r.mean;
        s.sum_var += r.var_bound;
    }
    return s;
}

ThresholdBreakdown threshold_row(const RowStats& a_stats, const BStatsSummary& b,
                                 int64_t n, const VabftParams& params) {
    if (n < 1) throw std::invalid_argument("threshold_row: n must be >= 1");
    const double nn = double(n);
    const double mu_a = a_stats.mean;
    const double sigma_a = std::sqrt(a_stats.var_bound);

    ThresholdBreakdown t;
    t.det = nn * std::abs(mu_a) * b.sum_abs_mean;
    t.var23 = params.c_sigma *
              std::sqrt(nn * mu_a * mu_a * b.sum_var + nn * nn * a_stats.var_bound * b.sum_mean_sq);
    t.var4 = params.c_sigma * std::sqrt(nn) * sigma_a * std::sqrt(b.sum_var);
    t.total = params.e_max * (t.det + t.var23 + t.var4);
    return t;
}

ThresholdBreakdown threshold_row(const RowStats& a_stats, std::span<const RowStats> b_stats,
                                 int64_t n, const VabftParams& params) {
    return threshold_row(a_stats, BStatsSummary::from(b_stats), n, params);
}

double resolve_e_max(const PrecisionSpec& spec, int64_t dim) {
    if (dim < 1) throw std::invalid_argument("resolve_e_max: dim must be >= 1");
    return spec.e_max_model.resolve(dim);
}

std::vector<double> vabft_thresholds(const Matrix& a, const Matrix& b,
                                     const VabftParams& params) {
    const BStatsSummary summary = BStatsSummary::from(precompute_b_stats(b));
    std::vector<double> out(size_t(a.rows()));
    for (int64_t i = 0; i < a.rows(); ++i)
        out[size_t(i)] = threshold_row(row_stats(a.row(i)), summary, b.cols(), params).total;
    return out;
}

} // namespace vabft
