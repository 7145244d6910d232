#pragma once

#include <optional>
#include <vector>

#include "vabft/checksum.hpp"

namespace vabft {

/// Per-row verification outcome. diff1/diff2 are the plain and
/// position-weighted checksum differences; when a row is flagged and the
/// difference is well above the rounding floor, the error column and the
/// correction delta are recovered from their ratio.
struct RowVerdict {
    int64_t row = 0;
    double diff1 = 0.0;     // C^r1'[i] - C^r1[i]
    double diff2 = 0.0;     // C^r2'[i] - C^r2[i]
    double threshold = 0.0;
    bool detected = false;
    std::optional<int64_t> location;
    std::optional<double> correction; // delta to subtract at (row, location)
    double localization_residual = 0.0;
};

struct DetectOptions {
    /// Localization is attempted only when |D1| exceeds this fraction of
    /// the row threshold (below it the ratio is rounding-dominated).
    double localization_floor_scale = 1e-3;
    /// Correction callers should require residual < 0.5 - residual_margin.
    double residual_margin = 0.1;
};

/// D2/D1 position recovery: j = round(D2/D1 - 1) clamped to [0, n_cols),
/// with the distance to the nearest integer reported as residual.
/// Requires |d1| > 0 and finite inputs; returns nullopt otherwise.
std::optional<std::pair<int64_t, double>> localize(double d1, double d2, int64_t n_cols);

/// Verifies every row of an encoded product against per-row thresholds.
/// A NaN difference is always treated as detected (location absent).
std::vector<RowVerdict> verify(const EncodedProduct& prod,
                               std::span<const double> thresholds,
                               const DetectOptions& opts = {});

/// Returns a copy of C with C[row][location] -= correction, re-quantized to
/// C's format; every other entry is bit-identical.
Matrix correct(const Matrix& c, const RowVerdict& verdict);

} // namespace vabft
