#include "vabft/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vabft {

RowStats row_stats(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("row_stats: empty row");

    double sum = 0.0, comp = 0.0; // Neumaier compensation
    double mx = values[0], mn = values[0];
    for (const double x : values) {
        if (!std::isfinite(x)) throw std::domain_error("row_stats: non-finite value");
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
        mx = std::max(mx, x);
        mn = std::min(mn, x);
    }
    RowStats s;
    s.n = int64_t(values.size());
    s.mean = std::clamp((sum + comp) / double(s.n), mn, mx);
    s.max = mx;
    s.min = mn;
    s.var_bound = std::max(0.0, (mx - s.mean) * (s.mean - mn));
    return s;
}

} // namespace vabft
