#include "vabft/threshold_aabft.hpp"

#include <cmath>
#include <stdexcept>

namespace vabft {

AabftParams AabftParams::for_format(Format f) {
    AabftParams p;
    switch (f) {
        case Format::FP64:
            p.mantissa_bits = 53;
            p.fixed_y = 21.0;
            break;
        case Format::FP32:
            p.mantissa_bits = 23;
            p.fixed_y = 21.0;
            break;
        case Format::BF16:
            p.mantissa_bits = 8;
            p.fixed_y.reset(); // computed y
            break;
        case Format::FP16:
            p.mantissa_bits = 11;
            p.fixed_y.reset();
            break;
    }
    return p;
}

double aabft_sigma(int64_t n, int mantissa_bits, double y) {
    if (n < 1) throw std::invalid_argument("aabft_sigma: n must be >= 1");
    const double nn = double(n);
    const double poly = nn * (nn + 1.0) * (nn + 0.5) + 2.0 * nn;
    return std::sqrt(poly / 24.0) * std::ldexp(1.0, -mantissa_bits) * y;
}

double aabft_computed_y(const Matrix& a, const Matrix& b) {
    double max_a = 0.0;
    for (const double v : a.values()) max_a = std::max(max_a, std::abs(v));
    double max_row_sum = 0.0;
    for (int64_t k = 0; k < b.rows(); ++k) {
        double s = 0.0;
        for (int64_t j = 0; j < b.cols(); ++j) s += b(k, j);
        max_row_sum = std::max(max_row_sum, std::abs(s));
    }
    return max_a * max_row_sum;
}

AabftThresholds aabft_threshold(const Matrix& a, const Matrix& b, const AabftParams& params) {
    if (a.cols() != b.rows())
        throw std::invalid_argument("aabft_threshold: inner dimensions disagree");
    const double y = params.fixed_y ? *params.fixed_y : aabft_computed_y(a, b);
    AabftThresholds out;
    out.y_used = y;
    out.degenerate = (y == 0.0);
    const double t = params.confidence_multiplier * aabft_sigma(a.cols(), params.mantissa_bits, y);
    out.per_row.assign(size_t(a.rows()), t);
    return out;
}

} // namespace vabft
