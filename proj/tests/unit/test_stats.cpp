#include <doctest.h>

#include <cmath>
#include <vector>

#include "vabft/rng.hpp"
#include "vabft/stats.hpp"

using namespace vabft;

namespace {

double population_variance(std::span<const double> v, double mean) {
    double acc = 0.0;
    for (const double x : v) acc += (x - mean) * (x - mean);
    return acc / double(v.size());
}

} // namespace

TEST_CASE("constant row collapses the bound") {
    const std::vector<double> v = {3.0, 3.0, 3.0};
    const RowStats s = row_stats(v);
    CHECK(s.mean == 3.0);
    CHECK(s.var_bound == 0.0);
    CHECK(s.n == 3);
}

TEST_CASE("balanced two-point row achieves equality") {
    const std::vector<double> v = {-1.0, -1.0, 1.0, 1.0};
    const RowStats s = row_stats(v);
    CHECK(s.mean == 0.0);
    CHECK(s.var_bound == 1.0);
    CHECK(population_variance(v, s.mean) == 1.0);
}

TEST_CASE("gaussian bound overestimates by a moderate factor") {
    Philox rng(19, 0);
    std::vector<double> v(10000);
    for (double& x : v) x = rng.normal();
    const RowStats s = row_stats(v);
    const double var = population_variance(v, s.mean);
    CHECK(s.var_bound >= var);
    const double ratio = s.var_bound / var;
    CHECK(ratio > 2.0);
    CHECK(ratio < 30.0);
}

TEST_CASE("extrema bound holds across distributions and lengths") {
    Philox rng(23, 1);
    for (int rep = 0; rep < 20000; ++rep) {
        const int n = 2 + int(rng.next_below(400));
        std::vector<double> v(size_t(n));
        switch (rng.next_below(4)) {
            case 0:
                for (double& x : v) x = rng.normal(rng.uniform(-5, 5), rng.uniform(0.01, 3));
                break;
            case 1:
                for (double& x : v) x = rng.uniform(-7.0, 9.0);
                break;
            case 2: { // two-point
                const double lo = rng.uniform(-4, 0), hi = rng.uniform(0, 4);
                for (double& x : v) x = rng.next_below(2) ? hi : lo;
                break;
            }
            default:
                for (double& x : v) x = rng.uniform(0.5, 1.5); // narrow positive
        }
        const RowStats s = row_stats(v);
        const double var = population_variance(v, s.mean);
        const double tol = 8.0 * std::abs(s.var_bound) * 0x1.0p-52 + 1e-300;
        REQUIRE(var <= s.var_bound + tol);
        REQUIRE(s.min <= s.mean);
        REQUIRE(s.mean <= s.max);
    }
}

TEST_CASE("translation invariance and scale law") {
    Philox rng(29, 0);
    std::vector<double> v(512);
    for (double& x : v) x = rng.normal(1.0, 2.0);
    const RowStats base = row_stats(v);

    std::vector<double> shifted = v;
    for (double& x : shifted) x += 17.25;
    CHECK(row_stats(shifted).var_bound ==
          doctest::Approx(base.var_bound).epsilon(1e-12));

    std::vector<double> scaled = v;
    for (double& x : scaled) x *= 3.0;
    CHECK(row_stats(scaled).var_bound ==
          doctest::Approx(9.0 * base.var_bound).epsilon(1e-12));
}

TEST_CASE("rejects empty or non-finite rows") {
    CHECK_THROWS(row_stats(std::vector<double>{}));
    CHECK_THROWS(row_stats(std::vector<double>{1.0, std::nan("")}));
    CHECK_THROWS(row_stats(std::vector<double>{1.0, INFINITY}));
}

TEST_CASE("single-pass mean withstands drift") {
    std::vector<double> v(1000000, 0.1);
    const RowStats s = row_stats(v);
    CHECK(s.mean == doctest::Approx(0.1).epsilon(1e-14));
}
