#include "vabft/detect.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vabft {

std::optional<std::pair<int64_t, double>> localize(double d1, double d2, int64_t n_cols) {
    if (d1 == 0.0 || !std::isfinite(d1) || !std::isfinite(d2)) return std::nullopt;
    const double pos = d2 / d1 - 1.0;
    if (!std::isfinite(pos)) return std::nullopt;
    const double nearest = std::nearbyint(pos); // ties to even
    const double residual = std::abs(pos - nearest);
    const int64_t j = std::clamp(int64_t(nearest), int64_t(0), n_cols - 1);
    return std::make_pair(j, residual);
}

std::vector<RowVerdict> verify(const EncodedProduct& prod,
                               std::span<const double> thresholds,
                               const DetectOptions& opts) {
    const Matrix& source = prod.verification_source();
    const int64_t m_len = source.rows();
    if (int64_t(thresholds.size()) != m_len)
        throw std::invalid_argument("verify: thresholds length must equal row count");
    for (const double t : thresholds)
        if (!(t >= 0.0)) throw std::invalid_argument("verify: thresholds must be >= 0");

    auto [r1, r2] = row_sums(source, prod.checksum_precision);

    std::vector<RowVerdict> out(static_cast<size_t>(m_len));
    for (int64_t i = 0; i < m_len; ++i) {
        RowVerdict& v = out[size_t(i)];
        v.row = i;
        v.threshold = thresholds[size_t(i)];
        v.diff1 = r1[size_t(i)] - prod.row_check1[size_t(i)];
        v.diff2 = r2[size_t(i)] - prod.row_check2[size_t(i)];

        if (std::isnan(v.diff1) || std::isnan(v.diff2)) {
            v.detected = true; // NaN anywhere in the sums is always an error
            continue;
        }
        v.detected = std::abs(v.diff1) > v.threshold;
        if (!v.detected) continue;

        const double floor = opts.localization_floor_scale * v.threshold;
        if (std::abs(v.diff1) <= floor) continue; // detected but unlocatable
        if (auto loc = localize(v.diff1, v.diff2, source.cols())) {
            v.location = loc->first;
            v.localization_residual = loc->second;
            v.correction = v.diff1;
        }
    }
    return out;
}

Matrix correct(const Matrix& c, const RowVerdict& verdict) {
    if (!verdict.detected || !verdict.location || !verdict.correction)
        throw std::invalid_argument("correct: verdict has no usable location");
    Matrix out = c;
    const int64_t i = verdict.row, j = *verdict.location;
    out.set(i, j, c(i, j) - *verdict.correction);
    return out;
}

} // namespace vabft
