#include <doctest.h>

#include <cmath>
#include <vector>

#include "vabft/distribution.hpp"
#include "vabft/threshold_vabft.hpp"

using namespace vabft;

TEST_CASE("hand-evaluated zero-mean case") {
    // mu_A=0, sigma_A=1, mu_Bk=0, sigma_Bk=1 for all k, N=K=100,
    // c_sigma=2.5, e_max=1e-3: only the interaction term survives and
    // T = 1e-3 * 2.5 * 10 * 1 * 10 = 0.25.
    RowStats a;
    a.mean = 0.0;
    a.var_bound = 1.0;
    a.max = 1.0;
    a.min = -1.0;
    a.n = 100;
    std::vector<RowStats> b(100, RowStats{0.0, 1.0, -1.0, 1.0, 100});
    const ThresholdBreakdown t = threshold_row(a, b, 100, {1e-3, 2.5});
    CHECK(t.det == 0.0);
    CHECK(t.var23 == 0.0);
    CHECK(t.var4 == doctest::Approx(250.0).epsilon(1e-12));
    CHECK(t.total == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("all-zero B gives a zero threshold") {
    const Matrix a(4, 8, PrecisionSpec::fp32());
    const Matrix b(8, 4, PrecisionSpec::fp32());
    Philox rng(1, 0);
    Matrix a2 = a;
    for (int64_t i = 0; i < 4; ++i)
        for (int64_t k = 0; k < 8; ++k) a2.set(i, k, rng.uniform(-1, 1));
    for (const double t : vabft_thresholds(a2, b, {1e-3, 2.5})) CHECK(t == 0.0);
}

TEST_CASE("B identity stats") {
    const Matrix b = Matrix::identity(2, PrecisionSpec::fp32());
    const std::vector<RowStats> stats = precompute_b_stats(b);
    REQUIRE(stats.size() == 2);
    for (const RowStats& s : stats) {
        CHECK(s.mean == 0.5);
        CHECK(s.var_bound == 0.25);
    }
}

TEST_CASE("uniform rows give variance bounds above the true variance") {
    Philox rng(3, 0);
    const PrecisionSpec fp = PrecisionSpec::fp64();
    const Matrix b = random_matrix(64, 1024, Distribution::uniform(-1, 1), fp, rng);
    for (const RowStats& s : precompute_b_stats(b)) {
        CHECK(s.var_bound >= 1.0 / 3.0 - 0.02); // true variance of U(-1,1)
    }
}

TEST_CASE("breakdown consistency and dominance") {
    Philox rng(5, 0);
    const PrecisionSpec fp = PrecisionSpec::fp64();
    const Matrix a = random_matrix(16, 32, Distribution::normal(0.3, 1.0), fp, rng);
    const Matrix b = random_matrix(32, 24, Distribution::normal(-0.2, 0.7), fp, rng);
    const BStatsSummary summary = BStatsSummary::from(precompute_b_stats(b));
    const VabftParams params{1e-4, 2.5};
    for (int64_t i = 0; i < 16; ++i) {
        const RowStats as = row_stats(a.row(i));
        const ThresholdBreakdown t = threshold_row(as, summary, 24, params);
        REQUIRE(t.total == params.e_max * (t.det + t.var23 + t.var4));
        REQUIRE(t.total >= params.e_max * t.var4); // term 4 alone never exceeds T
        REQUIRE(t.det >= 0.0);
        REQUIRE(t.var23 >= 0.0);
        REQUIRE(t.var4 >= 0.0);
    }
}

TEST_CASE("scaling a row of A by a power of two scales its threshold") {
    Philox rng(7, 0);
    const PrecisionSpec fp = PrecisionSpec::fp64();
    const Matrix b = random_matrix(32, 24, Distribution::uniform(-1, 1), fp, rng);
    const BStatsSummary summary = BStatsSummary::from(precompute_b_stats(b));
    std::vector<double> row(32);
    for (double& x : row) x = rng.normal(0.1, 1.0);
    std::vector<double> row8 = row;
    for (double& x : row8) x *= 8.0;

    const VabftParams params{1e-5, 2.5};
    const double t1 = threshold_row(row_stats(row), summary, 24, params).total;
    const double t8 = threshold_row(row_stats(row8), summary, 24, params).total;
    CHECK(t8 == doctest::Approx(8.0 * t1).epsilon(1e-12));
}

TEST_CASE("threshold grows with N and K") {
    RowStats a{0.1, 2.0, -1.5, 1.2, 100};
    std::vector<RowStats> b(64, RowStats{0.05, 1.0, -1.0, 0.8, 100});
    const VabftParams params{1e-3, 2.5};
    double prev = 0.0;
    for (const int64_t n : {8, 16, 64, 256, 1024}) {
        const double t = threshold_row(a, b, n, params).total;
        CHECK(t >= prev);
        prev = t;
    }
    const double t_k64 = threshold_row(a, b, 100, params).total;
    std::vector<RowStats> b2(128, RowStats{0.05, 1.0, -1.0, 0.8, 100});
    CHECK(threshold_row(a, b2, 100, params).total >= t_k64);
}

TEST_CASE("resolve_e_max follows the spec's model") {
    PrecisionSpec s = PrecisionSpec::fp32().with_e_max(EmaxModel::constant(1e-3));
    CHECK(resolve_e_max(s, 77) == 1e-3);
    s = s.with_e_max(EmaxModel::sqrt_scaled(5.0e-9, 1.2e-7));
    CHECK(resolve_e_max(s, 1024) == doctest::Approx(2.8e-7).epsilon(1e-12));
    CHECK_THROWS(resolve_e_max(s, 0));
}
