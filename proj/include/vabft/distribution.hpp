#pragma once

#include <string>

#include "vabft/precision.hpp"
#include "vabft/rng.hpp"

namespace vabft {

/// Element distribution for synthetic matrices.
struct Distribution {
    enum class Kind : uint8_t { Normal, Uniform, TruncNormal, AbsNormal };
    Kind kind = Kind::Uniform;
    double p0 = -1.0, p1 = 1.0; // mu,sigma or a,b
    double lo = -1.0, hi = 1.0; // truncation bounds

    static Distribution normal(double mu, double sigma);
    static Distribution uniform(double a, double b);
    static Distribution truncated_normal(double mu, double sigma, double lo, double hi);
    /// |N(mu, sigma)| — the calibration protocol's positive matrices.
    static Distribution abs_normal(double mu, double sigma);

    double sample(Philox& rng) const;
    std::string describe() const;

    /// Parses "normal:mu,sigma", "uniform:a,b", "truncnormal:mu,sigma,lo,hi"
    /// (trailing params optional), "absnormal:mu,sigma".
    static Distribution parse(const std::string& text);
};

/// Random matrix with entries drawn from dist and quantized to fmt.
Matrix random_matrix(int64_t rows, int64_t cols, const Distribution& dist,
                     const PrecisionSpec& fmt, Philox& rng);

} // namespace vabft
