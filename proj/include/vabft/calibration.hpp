#pragma once

#include <span>
#include <string>
#include <vector>

#include "vabft/checksum.hpp"
#include "vabft/precision.hpp"

namespace vabft {

struct CalibrationModel {
    EmaxModel::Kind kind = EmaxModel::Kind::Constant;
    double value = 0.0;  // Constant: mean of the per-size maxima
    double scale = 0.0;  // SqrtScaled: least-squares a, b of max vs sqrt(size)
    double offset = 0.0;
    double cv = 0.0; // coefficient of variation of the maxima
    double r2 = 0.0; // goodness of the sqrt fit (0 with < 2 sizes)
};

struct CalibrationResult {
    Format precision = Format::FP64;
    VerifyMode mode = VerifyMode::Offline;
    AccumStrategy accumulation{};
    std::vector<int64_t> sizes;
    std::vector<double> maxima; // per size: max over trials and rows of |D1|/|checksum|
    CalibrationModel model;
    double recommended = 0.0; // max(1.2 * overall max, 2u)
    uint64_t seed = 0;
    int64_t trials_per_size = 0;
    int64_t aborted_trials = 0;
    double unit_roundoff = 0.0;

    /// e_max for an accumulation length, with the safety margin and the 2u
    /// floor applied. Constant models ignore dim; SqrtScaled models follow
    /// the fitted trend, inflated so every calibrated size stays covered.
    double e_max_for(int64_t dim) const;

    /// Same rule packaged as an EmaxModel for PrecisionSpec.
    EmaxModel recommended_model() const;

    std::string to_json_string(int indent = 2) const;
};

/// Measures |D1| / |checksum| on positive |N(1,1)| matrices across sizes
/// (square GEMMs) and fits Constant vs SqrtScaled. Deterministic for fixed
/// (seed, sizes, trials).
CalibrationResult calibrate(const PrecisionSpec& precision, std::span<const int64_t> sizes,
                            int64_t trials_per_size, uint64_t seed,
                            VerifyMode mode = VerifyMode::Offline);

/// Model selection: Constant when the maxima vary little (CV < 15%),
/// otherwise least squares of max against sqrt(size).
CalibrationModel fit_model(std::span<const int64_t> sizes, std::span<const double> maxima);

} // namespace vabft
