#pragma once

#include <functional>
#include <optional>
#include <utility>

#include "vabft/checksum.hpp"
#include "vabft/detect.hpp"
#include "vabft/distribution.hpp"
#include "vabft/precision.hpp"
#include "vabft/rng.hpp"

namespace vabft {

enum class FaultTarget : uint8_t { OutputC, InputA, InputB };

enum class FlipDirection : uint8_t { Flip, Set0To1, Set1To0, Any };

const char* flip_direction_name(FlipDirection d);

struct FaultSpec {
    FaultTarget target = FaultTarget::OutputC;
    std::optional<std::pair<int64_t, int64_t>> position; // nullopt: random
    int bit_index = 0;
    FlipDirection direction = FlipDirection::Flip;
};

struct InjectionRecord {
    int64_t i = -1, j = -1;
    int bit = 0;
    FlipDirection direction_taken = FlipDirection::Flip;
    double value_before = 0.0;
    double value_after = 0.0;
    bool applied = false;
};

/// Canonical bit encoding of a stored value (BF16 1-8-7, FP16 1-5-10,
/// FP32/FP64 IEEE). Lossless in both directions, including NaN payloads,
/// so flipping a bit twice restores the original matrix bit-for-bit.
uint64_t encode_bits(double value, Format f);
double decode_bits(uint64_t bits, Format f);

/// Flips (or sets) one bit of one element's canonical encoding. For SET
/// directions with a fixed position whose bit already holds the target,
/// the record comes back with applied = false. With a random position,
/// the position is drawn uniformly over the eligible elements; if none is
/// eligible the injection is inapplicable (applied = false).
std::pair<Matrix, InjectionRecord> inject(const Matrix& m, const FaultSpec& spec, Philox& rng);

/// One fault-injection campaign: fresh random operands per trial, one
/// bit fault in the product, verification with caller-supplied thresholds.
struct CampaignConfig {
    int64_t m = 0, k = 0, n = 0;
    PrecisionSpec precision;
    Distribution dist;
    int bit_index = 0;
    int64_t trials = 1000;
    uint64_t seed = 0;
    VerifyMode mode = VerifyMode::Offline;
    /// Fault model of the published detection experiments: a stuck bit
    /// turning on (0 -> 1) at a uniformly chosen eligible element.
    FlipDirection direction = FlipDirection::Set0To1;
};

struct CampaignOutcome {
    int64_t trials = 0;
    int64_t applicable = 0; // injections actually applied
    int64_t detected = 0;
    int64_t located_correctly = 0;
    int64_t nonfinite_after = 0; // injected value became Inf/NaN

    bool measurable() const { return applicable > 0; }
    double detection_rate() const {
        return applicable > 0 ? double(detected) / double(applicable) : 0.0;
    }
    double localization_accuracy() const {
        return detected > 0 ? double(located_correctly) / double(detected) : 0.0;
    }
};

/// thresholds_fn(A, B) supplies per-row thresholds (the campaign is
/// threshold-method agnostic).
using ThresholdFn = std::function<std::vector<double>(const Matrix&, const Matrix&)>;

CampaignOutcome injection_campaign(const CampaignConfig& config, const ThresholdFn& thresholds_fn);

} // namespace vabft
