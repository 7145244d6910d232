#include "vabft/distribution.hpp"

#include <cmath>
#include <sstream>
#include <vector>
#include <stdexcept>

namespace vabft {

Distribution Distribution::normal(double mu, double sigma) {
    Distribution d;
    d.kind = Kind::Normal;
    d.p0 = mu;
    d.p1 = sigma;
    return d;
}

Distribution Distribution::uniform(double a, double b) {
    Distribution d;
    d.kind = Kind::Uniform;
    d.p0 = a;
    d.p1 = b;
    return d;
}

Distribution Distribution::truncated_normal(double mu, double sigma, double lo, double hi) {
    Distribution d;
    d.kind = Kind::TruncNormal;
    d.p0 = mu;
    d.p1 = sigma;
    d.lo = lo;
    d.hi = hi;
    return d;
}

Distribution Distribution::abs_normal(double mu, double sigma) {
    Distribution d;
    d.kind = Kind::AbsNormal;
    d.p0 = mu;
    d.p1 = sigma;
    return d;
}

double Distribution::sample(Philox& rng) const {
    switch (kind) {
        case Kind::Normal: return rng.normal(p0, p1);
        case Kind::Uniform: return rng.uniform(p0, p1);
        case Kind::TruncNormal: return rng.truncated_normal(p0, p1, lo, hi);
        case Kind::AbsNormal: return std::abs(rng.normal(p0, p1));
    }
    return 0.0;
}

namespace {

std::string num(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

} // namespace

std::string Distribution::describe() const {
    switch (kind) {
        case Kind::Normal: return "normal:" + num(p0) + "," + num(p1);
        case Kind::Uniform: return "uniform:" + num(p0) + "," + num(p1);
        case Kind::TruncNormal:
            return "truncnormal:" + num(p0) + "," + num(p1) + "," + num(lo) + "," + num(hi);
        case Kind::AbsNormal: return "absnormal:" + num(p0) + "," + num(p1);
    }
    return "?";
}

Distribution Distribution::parse(const std::string& text) {
    const size_t colon = text.find(':');
    const std::string name = text.substr(0, colon);
    std::vector<double> args;
    if (colon != std::string::npos) {
        std::stringstream ss(text.substr(colon + 1));
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (!tok.empty()) args.push_back(std::stod(tok));
        }
    }
    auto arg = [&](size_t i, double dflt) { return i < args.size() ? args[i] : dflt; };
    if (name == "normal") return normal(arg(0, 0.0), arg(1, 1.0));
    if (name == "uniform") return uniform(arg(0, -1.0), arg(1, 1.0));
    if (name == "truncnormal")
        return truncated_normal(arg(0, 0.0), arg(1, 1.0), arg(2, -1.0), arg(3, 1.0));
    if (name == "absnormal") return abs_normal(arg(0, 1.0), arg(1, 1.0));
    throw std::invalid_argument("unknown distribution: " + text);
}

Matrix random_matrix(int64_t rows, int64_t cols, const Distribution& dist,
                     const PrecisionSpec& fmt, Philox& rng) {
    Matrix m(rows, cols, fmt);
    for (int64_t i = 0; i < rows; ++i)
        for (int64_t j = 0; j < cols; ++j) m.set_raw(i, j, quantize(dist.sample(rng), fmt));
    return m;
}

} // namespace vabft
