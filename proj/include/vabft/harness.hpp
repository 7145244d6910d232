#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "vabft/calibration.hpp"
#include "vabft/checksum.hpp"
#include "vabft/distribution.hpp"
#include "vabft/faults.hpp"
#include "vabft/precision.hpp"

namespace vabft {

enum class ThresholdMethod : uint8_t { Vabft, AabftFixedY, AabftComputedY };

const char* method_name(ThresholdMethod m);

/// Accepts "vabft", "aabft-fixed-y", "aabft-computed-y" and the alias
/// "aabft" (fixed y for FP32/FP64, computed y for the 16-bit formats).
ThresholdMethod method_from_name(const std::string& name, Format fmt);

struct ExperimentConfig {
    PrecisionSpec precision = PrecisionSpec::fp32();
    Distribution dist = Distribution::uniform(-1.0, 1.0);
    int64_t m = 128, k = 1024, n = 256;
    int64_t trials = 100;
    uint64_t seed = 0;
    std::vector<ThresholdMethod> methods{ThresholdMethod::Vabft};
    VerifyMode mode = VerifyMode::Offline;
    std::optional<double> e_max_override;
    double c_sigma = 2.5;
    int bit_lo = 7, bit_hi = 14;             // detect-rate sweep range
    std::vector<int64_t> calib_sizes;        // empty: auto ({128,256,512} + K)
    int64_t calib_trials = 300;              // trials/size for auto-calibration
    bool large_ok = false;                   // gates >= 4096 dimensions
    std::string csv_path;                    // optional per-trial CSV (tightness)

    nlohmann::json echo(const std::string& experiment) const;
};

struct EmaxInfo {
    double value = 0.0;
    std::string source; // "override", "calibrated", "format-default"
};

/// e_max for a run: the explicit override if given, otherwise a (cached)
/// calibration of the emulated arithmetic resolved at the accumulation
/// length K.
EmaxInfo resolve_run_e_max(const ExperimentConfig& config);

/// Threshold provider for one method under a fixed config (VABFT needs the
/// resolved e_max).
ThresholdFn make_threshold_fn(const ExperimentConfig& config, ThresholdMethod method,
                              double e_max);

/// Experiment runners. Reports are JSON documents with sorted keys; rerun
/// with the same config and seed they are byte-identical except for the
/// "wall_time_s" field.
nlohmann::json run_tightness(const ExperimentConfig& config);
nlohmann::json run_fpr(const ExperimentConfig& config);
nlohmann::json run_detect_rate(const ExperimentConfig& config);
nlohmann::json run_calibrate(const ExperimentConfig& config);

struct VerifyFilesResult {
    nlohmann::json report;
    int exit_code = 0; // 0 clean, 2 detected (1 = usage, raised as exceptions)
};
VerifyFilesResult verify_files(const std::string& a_path, const std::string& b_path,
                               const std::optional<std::string>& check_against,
                               const ExperimentConfig& config);

} // namespace vabft
