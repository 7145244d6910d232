#include "vabft/calibration.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

#include "vabft/distribution.hpp"
#include "vabft/parallel.hpp"

namespace vabft {

CalibrationModel fit_model(std::span<const int64_t> sizes, std::span<const double> maxima) {
    if (sizes.size() != maxima.size() || sizes.empty())
        throw std::invalid_argument("fit_model: sizes and maxima must match and be nonempty");

    CalibrationModel m;
    const size_t n = maxima.size();
    double mean = 0.0;
    for (const double v : maxima) mean += v;
    mean /= double(n);
    m.value = mean;

    if (n >= 2 && mean > 0.0) {
        double ss = 0.0;
        for (const double v : maxima) ss += (v - mean) * (v - mean);
        m.cv = std::sqrt(ss / double(n - 1)) / mean;
    }

    if (n >= 2) {
        // Least squares of max against sqrt(size).
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (size_t i = 0; i < n; ++i) {
            const double x = std::sqrt(double(sizes[i]));
            sx += x;
            sy += maxima[i];
            sxx += x * x;
            sxy += x * maxima[i];
        }
        const double denom = double(n) * sxx - sx * sx;
        if (denom != 0.0) {
            m.scale = (double(n) * sxy - sx * sy) / denom;
            m.offset = (sy - m.scale * sx) / double(n);
            double ss_res = 0, ss_tot = 0;
            for (size_t i = 0; i < n; ++i) {
                const double fit = m.scale * std::sqrt(double(sizes[i])) + m.offset;
                ss_res += (maxima[i] - fit) * (maxima[i] - fit);
                ss_tot += (maxima[i] - mean) * (maxima[i] - mean);
            }
            m.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
        }
    }

    const bool constant = n < 2 || m.cv < 0.15 || m.scale <= 0.0;
    m.kind = constant ? EmaxModel::Kind::Constant : EmaxModel::Kind::SqrtScaled;
    return m;
}

double CalibrationResult::e_max_for(int64_t dim) const {
    const double floor = 2.0 * unit_roundoff;
    if (model.kind == EmaxModel::Kind::Constant) return std::max(recommended, floor);

    // Inflate the fit so every calibrated size stays covered, then apply
    // the 20% margin along the whole curve.
    double lambda = 1.0;
    for (size_t i = 0; i < sizes.size(); ++i) {
        const double fit = model.scale * std::sqrt(double(sizes[i])) + model.offset;
        if (fit > 0.0) lambda = std::max(lambda, maxima[i] / fit);
    }
    const double v = 1.2 * lambda * (model.scale * std::sqrt(double(dim)) + model.offset);
    return std::max(v, floor);
}

EmaxModel CalibrationResult::recommended_model() const {
    if (model.kind == EmaxModel::Kind::Constant)
        return EmaxModel::constant(std::max(recommended, 2.0 * unit_roundoff));
    double lambda = 1.0;
    for (size_t i = 0; i < sizes.size(); ++i) {
        const double fit = model.scale * std::sqrt(double(sizes[i])) + model.offset;
        if (fit > 0.0) lambda = std::max(lambda, maxima[i] / fit);
    }
    return EmaxModel::sqrt_scaled(1.2 * lambda * model.scale,
                                  std::max(1.2 * lambda * model.offset, 0.0));
}

CalibrationResult calibrate(const PrecisionSpec& precision, std::span<const int64_t> sizes,
                            int64_t trials_per_size, uint64_t seed, VerifyMode mode) {
    if (sizes.empty()) throw std::invalid_argument("calibrate: need at least one size");
    if (trials_per_size < 1) throw std::invalid_argument("calibrate: trials must be >= 1");

    const Distribution dist = Distribution::abs_normal(1.0, 1.0);
    const int64_t n_sizes = int64_t(sizes.size());
    const int64_t total = n_sizes * trials_per_size;
    std::vector<double> trial_max(size_t(total), 0.0);
    std::vector<uint8_t> trial_aborted(size_t(total), 0);

    parallel_for(total, [&](int64_t idx) {
        const int64_t si = idx / trials_per_size;
        const int64_t s = sizes[size_t(si)];
        Philox rng(seed, uint64_t(idx));
        const Matrix a = random_matrix(s, s, dist, precision, rng);
        const Matrix b = random_matrix(s, s, dist, precision, rng);
        const EncodedProduct prod = encode_and_multiply(a, b, mode);
        const auto [r1, r2] = row_sums(prod.verification_source(), prod.checksum_precision);

        double mx = 0.0;
        for (int64_t i = 0; i < s; ++i) {
            const double denom = std::abs(prod.row_check1[size_t(i)]);
            const double rel = std::abs(r1[size_t(i)] - prod.row_check1[size_t(i)]) / denom;
            if (!std::isfinite(rel)) {
                trial_aborted[size_t(idx)] = 1;
                return;
            }
            mx = std::max(mx, rel);
        }
        trial_max[size_t(idx)] = mx;
    });

    CalibrationResult out;
    out.precision = precision.format;
    out.mode = mode;
    out.accumulation = precision.accumulation;
    out.sizes.assign(sizes.begin(), sizes.end());
    out.seed = seed;
    out.trials_per_size = trials_per_size;
    // The 2u floor tracks the precision verification happens in (the
    // accumulator precision for online mode).
    out.unit_roundoff = checksum_precision_for(precision, mode).unit_roundoff;

    double overall = 0.0;
    for (int64_t si = 0; si < n_sizes; ++si) {
        double mx = 0.0;
        for (int64_t t = 0; t < trials_per_size; ++t) {
            const int64_t idx = si * trials_per_size + t;
            if (trial_aborted[size_t(idx)]) {
                ++out.aborted_trials;
                continue;
            }
            mx = std::max(mx, trial_max[size_t(idx)]);
        }
        out.maxima.push_back(mx);
        overall = std::max(overall, mx);
    }

    out.model = fit_model(out.sizes, out.maxima);
    out.recommended = std::max(1.2 * overall, 2.0 * out.unit_roundoff);
    return out;
}

std::string CalibrationResult::to_json_string(int indent) const {
    nlohmann::json j;
    j["precision"] = format_name(precision);
    j["mode"] = verify_mode_name(mode);
    j["accumulation"] = accumulation.describe();
    j["sizes"] = sizes;
    j["maxima"] = maxima;
    nlohmann::json jm;
    jm["kind"] = model.kind == EmaxModel::Kind::Constant ? "constant" : "sqrt_scaled";
    if (model.kind == EmaxModel::Kind::Constant) {
        jm["params"] = {{"value", model.value}};
    } else {
        jm["params"] = {{"scale", model.scale}, {"offset", model.offset}};
    }
    jm["cv"] = model.cv;
    jm["r2"] = model.r2;
    j["model"] = jm;
    j["recommended"] = recommended;
    j["seed"] = seed;
    j["trials"] = trials_per_size;
    if (aborted_trials > 0) j["aborted_trials"] = aborted_trials;
    return j.dump(indent);
}

} // namespace vabft
