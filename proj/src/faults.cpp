#include "vabft/faults.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "vabft/parallel.hpp"

namespace vabft {

const char* flip_direction_name(FlipDirection d) {
    switch (d) {
        case FlipDirection::Flip: return "flip";
        case FlipDirection::Set0To1: return "set0to1";
        case FlipDirection::Set1To0: return "set1to0";
        case FlipDirection::Any: return "any";
    }
    return "?";
}

namespace {

uint16_t f16_encode(double v) {
    if (std::isnan(v)) {
        const uint64_t b = std::bit_cast<uint64_t>(v);
        uint16_t m = uint16_t((b >> 42) & 0x3FF);
        if (m == 0) m = 0x200;
        return uint16_t(((b >> 48) & 0x8000) | 0x7C00 | m);
    }
    const uint16_t sign = std::signbit(v) ? 0x8000 : 0;
    if (std::isinf(v)) return sign | 0x7C00;
    const double a = std::abs(v);
    if (a == 0.0) return sign;
    const int e = std::ilogb(a);
    if (e < -14) return uint16_t(sign | uint16_t(std::llrint(std::ldexp(a, 24))));
    if (e > 15) return sign | 0x7C00; // beyond the grid; treated as overflow
    const uint16_t mant = uint16_t(std::llrint((std::ldexp(a, -e) - 1.0) * 1024.0));
    return uint16_t(sign | uint16_t(e + 15) << 10 | mant);
}

double f16_decode(uint16_t bits) {
    const bool neg = bits & 0x8000;
    const int e = (bits >> 10) & 0x1F;
    const uint16_t m = bits & 0x3FF;
    double v;
    if (e == 31) {
        if (m == 0) {
            v = std::numeric_limits<double>::infinity();
        } else {
            // Keep the payload so a second flip restores the exact pattern.
            const uint64_t b = 0x7FF0000000000000ull | (uint64_t(neg) << 63) | (uint64_t(m) << 42);
            return std::bit_cast<double>(b);
        }
    } else if (e == 0) {
        v = std::ldexp(double(m), -24);
    } else {
        v = std::ldexp(1.0 + double(m) / 1024.0, e - 15);
    }
    return neg ? -v : v;
}

} // namespace

uint64_t encode_bits(double value, Format f) {
    switch (f) {
        case Format::BF16: {
            const uint32_t b = std::bit_cast<uint32_t>(float(value));
            return b >> 16;
        }
        case Format::FP16: return f16_encode(value);
        case Format::FP32: return std::bit_cast<uint32_t>(float(value));
        case Format::FP64: return std::bit_cast<uint64_t>(value);
    }
    throw std::invalid_argument("encode_bits: bad format");
}

double decode_bits(uint64_t bits, Format f) {
    switch (f) {
        case Format::BF16: return double(std::bit_cast<float>(uint32_t(bits) << 16));
        case Format::FP16: return f16_decode(uint16_t(bits));
        case Format::FP32: return double(std::bit_cast<float>(uint32_t(bits)));
        case Format::FP64: return std::bit_cast<double>(bits);
    }
    throw std::invalid_argument("decode_bits: bad format");
}

namespace {

bool bit_is_eligible(uint64_t bits, int bit, FlipDirection dir) {
    const uint64_t b = (bits >> bit) & 1;
    switch (dir) {
        case FlipDirection::Flip: return true;
        case FlipDirection::Set0To1: return b == 0;
        case FlipDirection::Set1To0: return b == 1;
        case FlipDirection::Any: return true;
    }
    return false;
}

} // namespace

std::pair<Matrix, InjectionRecord> inject(const Matrix& m, const FaultSpec& spec, Philox& rng) {
    const Format fmt = m.format().format;
    if (spec.bit_index < 0 || spec.bit_index >= m.format().bit_width())
        throw std::out_of_range("inject: bit index outside the format's width");

    FlipDirection dir = spec.direction;
    if (dir == FlipDirection::Any)
        dir = rng.next_u32() & 1 ? FlipDirection::Set0To1 : FlipDirection::Set1To0;

    InjectionRecord rec;
    rec.bit = spec.bit_index;
    rec.direction_taken = dir;

    int64_t i = -1, j = -1;
    if (spec.position) {
        i = spec.position->first;
        j = spec.position->second;
        if (i < 0 || i >= m.rows() || j < 0 || j >= m.cols())
            throw std::out_of_range("inject: position out of range");
        if (!bit_is_eligible(encode_bits(m(i, j), fmt), spec.bit_index, dir)) {
            rec.i = i;
            rec.j = j;
            rec.value_before = rec.value_after = m(i, j);
            return {m, rec};
        }
    } else {
        // Uniform over eligible positions: random probes, then a full scan
        // if the eligible set looks sparse.
        const int64_t total = m.rows() * m.cols();
        bool found = false;
        for (int probe = 0; probe < 128 && !found; ++probe) {
            const int64_t flat = int64_t(rng.next_below(uint64_t(total)));
            const int64_t pi = flat / m.cols(), pj = flat % m.cols();
            if (bit_is_eligible(encode_bits(m(pi, pj), fmt), spec.bit_index, dir)) {
                i = pi;
                j = pj;
                found = true;
            }
        }
        if (!found) {
            std::vector<int64_t> eligible;
            for (int64_t flat = 0; flat < total; ++flat) {
                if (bit_is_eligible(encode_bits(m(flat / m.cols(), flat % m.cols()), fmt),
                                    spec.bit_index, dir))
                    eligible.push_back(flat);
            }
            if (eligible.empty()) return {m, rec}; // inapplicable
            const int64_t flat = eligible[size_t(rng.next_below(eligible.size()))];
            i = flat / m.cols();
            j = flat % m.cols();
        }
    }

    const uint64_t before = encode_bits(m(i, j), fmt);
    const uint64_t after = before ^ (uint64_t(1) << spec.bit_index);
    Matrix out = m;
    out.set_raw(i, j, decode_bits(after, fmt));

    rec.i = i;
    rec.j = j;
    rec.value_before = m(i, j);
    rec.value_after = out(i, j);
    rec.applied = true;
    return {std::move(out), rec};
}

CampaignOutcome injection_campaign(const CampaignConfig& config, const ThresholdFn& thresholds_fn) {
    if (config.trials < 1) throw std::invalid_argument("injection_campaign: trials must be >= 1");

    struct TrialResult {
        bool applied = false;
        bool detected = false;
        bool located = false;
        bool nonfinite = false;
    };
    std::vector<TrialResult> results(size_t(config.trials));

    parallel_for(config.trials, [&](int64_t trial) {
        Philox rng(config.seed, uint64_t(trial));
        const Matrix a = random_matrix(config.m, config.k, config.dist, config.precision, rng);
        const Matrix b = random_matrix(config.k, config.n, config.dist, config.precision, rng);
        EncodedProduct prod = encode_and_multiply(a, b, config.mode);
        const std::vector<double> thresholds = thresholds_fn(a, b);

        FaultSpec spec;
        spec.bit_index = config.bit_index;
        spec.direction = config.direction;
        Matrix& target = config.mode == VerifyMode::Online ? prod.c_accum : prod.c;
        auto [corrupted, rec] = inject(target, spec, rng);
        if (!rec.applied) return;
        target = std::move(corrupted);

        const std::vector<RowVerdict> verdicts = verify(prod, thresholds);
        const RowVerdict& v = verdicts[size_t(rec.i)];

        TrialResult& r = results[size_t(trial)];
        r.applied = true;
        r.nonfinite = !std::isfinite(rec.value_after);
        r.detected = v.detected;
        r.located = v.detected && v.location && *v.location == rec.j;
    });

    CampaignOutcome out;
    out.trials = config.trials;
    for (const TrialResult& r : results) {
        if (!r.applied) continue;
        ++out.applicable;
        if (r.detected) ++out.detected;
        if (r.located) ++out.located_correctly;
        if (r.nonfinite) ++out.nonfinite_after;
    }
    return out;
}

} // namespace vabft
