#pragma once

#include <cstdint>
#include <span>

namespace vabft {

/// Row summary feeding the threshold formula. var_bound is the
/// extrema-variance bound (max - mean)(mean - min), an upper bound on the
/// population variance that needs only one pass.
struct RowStats {
    double mean = 0.0;
    double max = 0.0;
    double min = 0.0;
    double var_bound = 0.0;
    int64_t n = 0;
};

/// Single O(n) pass; mean in FP64 with one compensation term. Throws on an
/// empty row or non-finite input.
RowStats row_stats(std::span<const double> values);

} // namespace vabft
