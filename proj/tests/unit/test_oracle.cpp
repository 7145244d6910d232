#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "vabft/checksum.hpp"
#include "vabft/distribution.hpp"
#include "vabft/oracle.hpp"

using namespace vabft;

TEST_CASE("oracle product of integer matrices is exact") {
    const PrecisionSpec fp = PrecisionSpec::fp64();
    const Matrix a = Matrix::from_values(2, 2, {{1.0, 2.0, 3.0, 4.0}}, fp, false);
    const Matrix b = Matrix::from_values(2, 2, {{5.0, 6.0, 7.0, 8.0}}, fp, false);
    const OracleMatrix c = gemm_oracle(a, b);
    CHECK(c.to_double(0, 0) == 19.0);
    CHECK(c.to_double(0, 1) == 22.0);
    CHECK(c.to_double(1, 0) == 43.0);
    CHECK(c.to_double(1, 1) == 50.0);
}

TEST_CASE("a million tenths stays accurate to 90 digits") {
    BigReal tenth("0.1");
    BigReal sum;
    for (int i = 0; i < 1000000; ++i) sum += tenth;
    const BigReal expected(100000.0);
    CHECK(sum.relative_difference_from(expected) <= 1e-90);
}

TEST_CASE("row sum diffs are zero for zero matrices") {
    const Matrix z(4, 4, PrecisionSpec::fp64());
    const std::vector<double> checks(4, 0.0);
    for (const double d : oracle_row_diffs(checks, z)) CHECK(d == 0.0);
}

TEST_CASE("FP64 verification difference has the expected magnitude") {
    // 128x128 U(-1,1): the measured difference against the oracle baseline
    // sits around 1e-14; assert the order of magnitude.
    Philox rng(77, 0);
    const PrecisionSpec fp = PrecisionSpec::fp64();
    const Distribution dist = Distribution::uniform(-1.0, 1.0);
    std::vector<double> diffs;
    for (int trial = 0; trial < 3; ++trial) {
        const Matrix a = random_matrix(128, 128, dist, fp, rng);
        const Matrix b = random_matrix(128, 128, dist, fp, rng);
        const EncodedProduct prod = encode_and_multiply(a, b);
        for (const double d : oracle_row_diffs(prod.row_check1, prod.c)) diffs.push_back(d);
    }
    std::sort(diffs.begin(), diffs.end());
    const double median = diffs[diffs.size() / 2];
    CHECK(median > 1.27e-15);
    CHECK(median < 1.27e-13);
}

TEST_CASE("oracle_dot and weighted row sums") {
    const std::vector<double> x = {1.0, 2.0, 3.0};
    const std::vector<double> y = {4.0, 5.0, 6.0};
    CHECK(oracle_dot(x, y).to_double() == 32.0);

    const Matrix m = Matrix::from_values(1, 3, x, PrecisionSpec::fp64(), false);
    CHECK(oracle_row_sum(m, 0).to_double() == 6.0);
    CHECK(oracle_row_sum(m, 0, /*weighted=*/true).to_double() == 1.0 + 4.0 + 9.0);
}

TEST_CASE("BigReal arithmetic basics") {
    BigReal a(1.5);
    a *= 2.0;
    CHECK(a.to_double() == 3.0);
    BigReal b(-4.0);
    b += a;
    CHECK(b.to_double() == -1.0);
    CHECK(b.abs().to_double() == 1.0);
    CHECK(b.compare(a) < 0);
    CHECK_THROWS(BigReal("not-a-number"));
}

TEST_CASE("rounded oracle matrix respects the target format") {
    const PrecisionSpec bf = PrecisionSpec::bf16();
    const Matrix a = Matrix::from_values(1, 2, {{3.0, 5.0}}, bf, false);
    const Matrix b = Matrix::from_values(2, 1, {{7.0, 11.0}}, bf, false);
    const OracleMatrix c = gemm_oracle(a, b);
    const Matrix r = c.rounded(bf);
    CHECK(r(0, 0) == 76.0); // exact on the BF16 grid
}
