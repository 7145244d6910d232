#include <doctest.h>

#include <bit>
#include <cmath>
#include <limits>
#include <vector>

#include "vabft/faults.hpp"
#include "vabft/oracle.hpp"
#include "vabft/precision.hpp"
#include "vabft/rng.hpp"

using namespace vabft;

namespace {

// Independent rounding oracle: scan every finite 16-bit pattern for the
// value nearest to x, ties to the even encoding (encodings of consecutive
// magnitudes are consecutive integers, so the LSB is the significand LSB).
double nearest_by_enumeration(double x, Format f) {
    REQUIRE((f == Format::BF16 || f == Format::FP16));
    double best = 0.0;
    double best_err = std::numeric_limits<double>::infinity();
    uint64_t best_bits = 0;
    for (uint32_t bits = 0; bits < 0x10000; ++bits) {
        const double v = decode_bits(bits, f);
        if (!std::isfinite(v)) continue;
        const double err = std::abs(x - v);
        if (err < best_err ||
            (err == best_err && (bits & 1u) == 0 && (best_bits & 1u) == 1)) {
            best = v;
            best_err = err;
            best_bits = bits;
        }
    }
    return best;
}

std::vector<double> scattered_doubles(int count, uint64_t seed) {
    Philox rng(seed, 0);
    std::vector<double> xs;
    for (int i = 0; i < count; ++i) {
        const double mag = rng.uniform(-45.0, 45.0); // spans subnormals to overflow
        xs.push_back(std::ldexp(rng.uniform(-2.0, 2.0), int(mag)));
    }
    return xs;
}

} // namespace

TEST_CASE("quantize basics on BF16") {
    const PrecisionSpec bf = PrecisionSpec::bf16();
    CHECK(quantize(1.0, bf) == 1.0);
    CHECK(quantize(1.0 + 0x1.0p-9, bf) == 1.0);        // below half-ulp
    CHECK(quantize(1.0 + 0x1.0p-8, bf) == 1.0);        // tie -> even
    CHECK(quantize(1.0 + 3 * 0x1.0p-8, bf) == 1.0 + 0x1.0p-6); // tie -> even (up)
    CHECK(quantize(1.0 + 0x1.0p-8 + 0x1.0p-50, bf) == 1.0 + 0x1.0p-7); // just above tie
    CHECK(quantize(-1.5, bf) == -1.5);
    CHECK(quantize(0.0, bf) == 0.0);
    CHECK(std::signbit(quantize(-0.0, bf)));
}

TEST_CASE("quantize(0.1, FP16) against exhaustive enumeration") {
    const PrecisionSpec fp = PrecisionSpec::fp16();
    const double q = quantize(0.1, fp);
    CHECK(q == nearest_by_enumeration(0.1, Format::FP16));
    CHECK(std::abs(q - 0.1) <= 0.1 * 0x1.0p-11);
}

TEST_CASE("quantize matches the enumeration oracle across scales") {
    const PrecisionSpec bf = PrecisionSpec::bf16();
    const PrecisionSpec fp = PrecisionSpec::fp16();
    for (const double x : scattered_doubles(1500, 101)) {
        CAPTURE(x);
        REQUIRE(quantize(x, bf) == nearest_by_enumeration(x, Format::BF16));
        REQUIRE(quantize(x, fp) == nearest_by_enumeration(x, Format::FP16));
    }
}

TEST_CASE("FP32 quantize agrees with the native cast") {
    const PrecisionSpec fp = PrecisionSpec::fp32();
    Philox rng(5, 0);
    for (int i = 0; i < 100000; ++i) {
        const double x = std::ldexp(rng.uniform(-2.0, 2.0), int(rng.uniform(-160.0, 120.0)));
        CAPTURE(x);
        REQUIRE(quantize(x, fp) == double(float(x)));
    }
    CHECK(quantize(0x1.0p-149, fp) == double(0x1.0p-149f)); // min subnormal
}

TEST_CASE("quantize idempotence and monotonicity") {
    Philox rng(9, 0);
    for (const Format f : {Format::BF16, Format::FP16, Format::FP32, Format::FP64}) {
        const PrecisionSpec spec = PrecisionSpec::of(f);
        for (int i = 0; i < 25000; ++i) {
            const double x = std::ldexp(rng.uniform(-2.0, 2.0), int(rng.uniform(-140.0, 30.0)));
            const double y = std::ldexp(rng.uniform(-2.0, 2.0), int(rng.uniform(-140.0, 30.0)));
            const double qx = quantize(x, spec);
            REQUIRE(quantize(qx, spec) == qx);
            if (x <= y) {
                REQUIRE(qx <= quantize(y, spec));
            } else {
                REQUIRE(qx >= quantize(y, spec));
            }
        }
    }
}

TEST_CASE("FP64 quantize is the identity") {
    const PrecisionSpec spec = PrecisionSpec::fp64();
    Philox rng(3, 0);
    for (int i = 0; i < 10000; ++i) {
        const double x = std::ldexp(rng.uniform(-2.0, 2.0), int(rng.uniform(-1000.0, 1000.0)));
        REQUIRE(quantize(x, spec) == x);
    }
}

TEST_CASE("quantize subnormal handling (no flush to zero)") {
    const PrecisionSpec bf = PrecisionSpec::bf16();
    const double mn = bf.min_subnormal(); // 2^-133
    CHECK(mn == 0x1.0p-133);
    CHECK(quantize(mn, bf) == mn);
    CHECK(quantize(0.6 * mn, bf) == mn);
    CHECK(quantize(0.5 * mn, bf) == 0.0); // tie -> even (zero)
    CHECK(quantize(0.49 * mn, bf) == 0.0);
    CHECK(quantize(-0.75 * mn, bf) == -mn);
}

TEST_CASE("quantize overflow policy") {
    PrecisionSpec bf = PrecisionSpec::bf16();
    CHECK(quantize(1e39, bf) == bf.max_finite());
    CHECK(quantize(-1e39, bf) == -bf.max_finite());
    bf.overflow = OverflowPolicy::Error;
    CHECK_THROWS_AS(quantize(1e39, bf), std::range_error);
    CHECK_THROWS_AS(quantize(std::numeric_limits<double>::quiet_NaN(), bf), std::domain_error);
    CHECK_THROWS_AS(quantize(std::numeric_limits<double>::infinity(), bf), std::domain_error);

    PrecisionSpec fp = PrecisionSpec::fp16();
    CHECK(quantize(70000.0, fp) == 65504.0);
}

TEST_CASE("matrix construction validates") {
    const PrecisionSpec bf = PrecisionSpec::bf16();
    const std::vector<double> vals = {1.0, 0.1, -2.0, 3.0};
    const Matrix m = Matrix::from_values(2, 2, vals, bf);
    CHECK(m(0, 1) == quantize(0.1, bf));
    CHECK_THROWS(Matrix::from_values(2, 2, vals, bf, /*quantize_values=*/false));

    const std::vector<double> bad = {1.0, std::nan(""), 0.0, 0.0};
    CHECK_THROWS(Matrix::from_values(2, 2, bad, bf));
    CHECK_THROWS(Matrix(0, 3, bf));
}

TEST_CASE("gemm identity passes through exactly") {
    const PrecisionSpec fp = PrecisionSpec::fp32();
    const Matrix eye = Matrix::identity(4, fp);
    Philox rng(21, 0);
    std::vector<double> vals;
    for (int i = 0; i < 16; ++i) vals.push_back(quantize(rng.uniform(-10.0, 10.0), fp));
    const Matrix b = Matrix::from_values(4, 4, vals, fp, false);
    const Matrix c = gemm_emulated(eye, b);
    CHECK(c.same_bits(b));
}

TEST_CASE("small integer BF16 product is exact") {
    // Entries in {0..7} with K=4 keep every dot product below 256, so all
    // intermediates sit on the BF16 grid.
    const PrecisionSpec bf = PrecisionSpec::bf16();
    Philox rng(31, 0);
    std::vector<double> av, bv;
    for (int i = 0; i < 6 * 4; ++i) av.push_back(double(rng.next_below(8)));
    for (int i = 0; i < 4 * 5; ++i) bv.push_back(double(rng.next_below(8)));
    const Matrix a = Matrix::from_values(6, 4, av, bf, false);
    const Matrix b = Matrix::from_values(4, 5, bv, bf, false);
    const Matrix c = gemm_emulated(a, b);
    const OracleMatrix ref = gemm_oracle(a, b);
    for (int64_t i = 0; i < 6; ++i)
        for (int64_t j = 0; j < 5; ++j) REQUIRE(c(i, j) == ref.to_double(i, j));
}

TEST_CASE("gemm error never exceeds the classical bound") {
    // |emulated - exact| <= ((K+1) u_accum + u_out) * sum_k |a_k b_k|
    Philox rng(17, 0);
    const Distribution dist = Distribution::uniform(-1.0, 1.0);
    for (const Format f : {Format::BF16, Format::FP32}) {
        const PrecisionSpec spec = PrecisionSpec::of(f);
        const int64_t k_len = 64;
        const Matrix a = random_matrix(8, k_len, dist, spec, rng);
        const Matrix b = random_matrix(k_len, 8, dist, spec, rng);
        const Matrix c = gemm_emulated(a, b);
        const OracleMatrix ref = gemm_oracle(a, b);
        const double u_acc = 0x1.0p-24;
        const double bound_coeff = double(k_len + 1) * u_acc + spec.unit_roundoff;
        for (int64_t i = 0; i < 8; ++i) {
            for (int64_t j = 0; j < 8; ++j) {
                std::vector<double> prods(size_t(k_len));
                for (int64_t k = 0; k < k_len; ++k)
                    prods[size_t(k)] = std::abs(a(i, k) * b(k, j));
                double abs_sum = 0.0;
                for (const double p : prods) abs_sum += p;
                const double err = std::abs(c(i, j) - ref.to_double(i, j));
                REQUIRE(err <= bound_coeff * abs_sum + 1e-300);
            }
        }
    }
}

TEST_CASE("random FP32 gemm stays within the sequential worst case") {
    const PrecisionSpec spec =
        PrecisionSpec::fp32().with_accumulation({AccumKind::NativeSequential, 128});
    Philox rng(23, 0);
    const Distribution dist = Distribution::uniform(-1.0, 1.0);
    const Matrix a = random_matrix(64, 64, dist, spec, rng);
    const Matrix b = random_matrix(64, 64, dist, spec, rng);
    const Matrix c = gemm_emulated(a, b);
    const OracleMatrix ref = gemm_oracle(a, b);
    // Relative to the absolute-value sum (the classical denominator).
    for (int64_t i = 0; i < 64; ++i) {
        for (int64_t j = 0; j < 64; ++j) {
            double abs_sum = 0.0;
            for (int64_t k = 0; k < 64; ++k) abs_sum += std::abs(a(i, k) * b(k, j));
            const double err = std::abs(c(i, j) - ref.to_double(i, j));
            REQUIRE(err <= 64.0 * 0x1.0p-24 * abs_sum);
        }
    }
}

TEST_CASE("integer inputs with fp32 accumulation match the oracle exactly") {
    const PrecisionSpec bf = PrecisionSpec::bf16();
    Philox rng(41, 0);
    std::vector<double> av, bv;
    for (int i = 0; i < 16 * 16; ++i) av.push_back(double(rng.next_below(4)));
    for (int i = 0; i < 16 * 16; ++i) bv.push_back(double(rng.next_below(4)));
    // Entries in {0..3}, K=16: dot products stay <= 144 < 256.
    const Matrix a = Matrix::from_values(16, 16, av, bf, false);
    const Matrix b = Matrix::from_values(16, 16, bv, bf, false);
    const Matrix c = gemm_emulated(a, b);
    const OracleMatrix ref = gemm_oracle(a, b);
    for (int64_t i = 0; i < 16; ++i)
        for (int64_t j = 0; j < 16; ++j) REQUIRE(c(i, j) == ref.to_double(i, j));
}

TEST_CASE("blocked accumulation degenerate cases equal sequential") {
    const Distribution dist = Distribution::uniform(-1.0, 1.0);
    Philox rng(51, 0);
    const PrecisionSpec seq =
        PrecisionSpec::fp32().with_accumulation({AccumKind::NativeSequential, 128});
    const Matrix a = random_matrix(4, 100, dist, seq, rng);
    const Matrix b = random_matrix(100, 4, dist, seq, rng);

    for (const int64_t bl : {int64_t(1), int64_t(1000)}) {
        const PrecisionSpec blk =
            PrecisionSpec::fp32().with_accumulation({AccumKind::NativeBlocked, bl});
        const Matrix a2 = Matrix::from_values(4, 100, {a.values().begin(), a.values().end()}, blk, false);
        const Matrix b2 = Matrix::from_values(100, 4, {b.values().begin(), b.values().end()}, blk, false);
        CHECK(gemm_emulated(a, b).same_bits(gemm_emulated(a2, b2)));
    }
}

TEST_CASE("pairwise reduction matches a reference tree") {
    std::vector<float> terms;
    Philox rng(61, 0);
    for (int i = 0; i < 1000; ++i) terms.push_back(float(rng.uniform(-1.0, 1.0)));

    // Reference: same balanced split, written independently.
    auto ref = [&](auto&& self, size_t lo, size_t hi) -> float {
        if (hi - lo == 1) return terms[lo];
        const size_t mid = lo + (hi - lo) / 2;
        return self(self, lo, mid) + self(self, mid, hi);
    };
    const float expected = ref(ref, 0, terms.size());
    CHECK(reduce(std::span<const float>(terms), {AccumKind::NativePairwise, 128}) == expected);
}

TEST_CASE("16-bit formats require fp32 accumulation") {
    const PrecisionSpec bad =
        PrecisionSpec::bf16().with_accumulation({AccumKind::NativeSequential, 128});
    const Matrix a(2, 2, bad), b(2, 2, bad);
    CHECK_THROWS(gemm_emulated(a, b));
}

TEST_CASE("gemm validates shapes and formats") {
    const Matrix a(2, 3, PrecisionSpec::fp32());
    const Matrix b(4, 2, PrecisionSpec::fp32());
    CHECK_THROWS(gemm_emulated(a, b));
    const Matrix c(3, 2, PrecisionSpec::fp64());
    CHECK_THROWS(gemm_emulated(a, c));
}

TEST_CASE("e_max model resolution") {
    CHECK(EmaxModel::constant(1e-3).resolve(4096) == 1e-3);
    // Published GPU FP32 fit evaluated at 1024.
    const EmaxModel gpu = EmaxModel::sqrt_scaled(5.0e-9, 1.2e-7);
    CHECK(gpu.resolve(1024) == doctest::Approx(2.8e-7).epsilon(1e-12));
}
