#include "vabft/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <stdexcept>

#include "vabft/detect.hpp"
#include "vabft/matrix_io.hpp"
#include "vabft/oracle.hpp"
#include "vabft/parallel.hpp"
#include "vabft/threshold_aabft.hpp"
#include "vabft/threshold_vabft.hpp"

namespace vabft {

namespace {

constexpr uint64_t kCalibSeedSalt = 0x9E3779B97F4A7C15ull;
constexpr int64_t kLargeDim = 4096;

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void check_dims(const ExperimentConfig& c) {
    if (c.m < 1 || c.k < 1 || c.n < 1)
        throw std::invalid_argument("dims must be >= 1");
    if (!c.large_ok && (c.m >= kLargeDim || c.k >= kLargeDim || c.n >= kLargeDim))
        throw std::invalid_argument(
            "dimensions >= 4096 are expensive at desk scale; pass --large to confirm");
    if (c.trials < 1) throw std::invalid_argument("trials must be >= 1");
}

// Kahan-Babuska compensated sum; error is far below any emulated format.
double compensated_sum(std::span<const double> v) {
    double s = 0.0, comp = 0.0;
    for (const double x : v) {
        const double t = s + x;
        if (std::abs(s) >= std::abs(x))
            comp += (s - t) + x;
        else
            comp += (x - t) + s;
        s = t;
    }
    return s + comp;
}

// Actual verification difference per row: |checksum - baseline row sum|,
// with the FP64 oracle for FP64 data and FP64 summation otherwise.
std::vector<double> baseline_row_diffs(const EncodedProduct& prod) {
    const Matrix& src = prod.verification_source();
    if (src.format().format == Format::FP64)
        return oracle_row_diffs(prod.row_check1, src);
    std::vector<double> out(size_t(src.rows()));
    for (int64_t i = 0; i < src.rows(); ++i)
        out[size_t(i)] =
            std::abs(prod.row_check1[size_t(i)] - compensated_sum(src.row(i)));
    return out;
}

std::mutex g_calib_mutex;
std::map<std::string, CalibrationResult> g_calib_cache;

std::string calib_cache_key(const PrecisionSpec& p, VerifyMode mode,
                            std::span<const int64_t> sizes, int64_t trials, uint64_t seed) {
    std::string key = std::string(p.name()) + "|" + p.accumulation.describe() + "|" +
                      verify_mode_name(mode) + "|" + std::to_string(trials) + "|" +
                      std::to_string(seed) + "|";
    for (const int64_t s : sizes) key += std::to_string(s) + ",";
    return key;
}

const CalibrationResult& cached_calibrate(const PrecisionSpec& p, VerifyMode mode,
                                          std::span<const int64_t> sizes, int64_t trials,
                                          uint64_t seed) {
    const std::string key = calib_cache_key(p, mode, sizes, trials, seed);
    {
        std::lock_guard<std::mutex> lock(g_calib_mutex);
        auto it = g_calib_cache.find(key);
        if (it != g_calib_cache.end()) return it->second;
    }
    CalibrationResult r = calibrate(p, sizes, trials, seed, mode);
    std::lock_guard<std::mutex> lock(g_calib_mutex);
    return g_calib_cache.emplace(key, std::move(r)).first->second;
}

std::vector<int64_t> auto_calib_sizes(const ExperimentConfig& c) {
    if (!c.calib_sizes.empty()) return c.calib_sizes;
    std::vector<int64_t> sizes = {128, 256, 512};
    if (c.k > 512) sizes.push_back(c.k);
    if (c.k < 128) sizes.insert(sizes.begin(), c.k);
    return sizes;
}

} // namespace

const char* method_name(ThresholdMethod m) {
    switch (m) {
        case ThresholdMethod::Vabft: return "vabft";
        case ThresholdMethod::AabftFixedY: return "aabft-fixed-y";
        case ThresholdMethod::AabftComputedY: return "aabft-computed-y";
    }
    return "?";
}

ThresholdMethod method_from_name(const std::string& name, Format fmt) {
    if (name == "vabft") return ThresholdMethod::Vabft;
    if (name == "aabft-fixed-y" || name == "aabft_fixed_y") return ThresholdMethod::AabftFixedY;
    if (name == "aabft-computed-y" || name == "aabft_computed_y")
        return ThresholdMethod::AabftComputedY;
    if (name == "aabft")
        return (fmt == Format::FP32 || fmt == Format::FP64) ? ThresholdMethod::AabftFixedY
                                                            : ThresholdMethod::AabftComputedY;
    throw std::invalid_argument("unknown threshold method: " + name);
}

nlohmann::json ExperimentConfig::echo(const std::string& experiment) const {
    nlohmann::json j;
    j["experiment"] = experiment;
    j["precision"] = precision.name();
    j["accumulation"] = precision.accumulation.describe();
    j["distribution"] = dist.describe();
    j["dims"] = {m, k, n};
    j["trials"] = trials;
    j["seed"] = seed;
    j["mode"] = verify_mode_name(mode);
    j["c_sigma"] = c_sigma;
    j["rng"] = "philox4x32-10";
    std::vector<std::string> ms;
    for (const ThresholdMethod t : methods) ms.emplace_back(method_name(t));
    j["methods"] = ms;
    return j;
}

EmaxInfo resolve_run_e_max(const ExperimentConfig& config) {
    if (config.e_max_override) return {*config.e_max_override, "override"};
    const std::vector<int64_t> sizes = auto_calib_sizes(config);
    const CalibrationResult& calib =
        cached_calibrate(config.precision, config.mode, sizes, config.calib_trials,
                         config.seed ^ kCalibSeedSalt);
    return {calib.e_max_for(config.k), "calibrated"};
}

ThresholdFn make_threshold_fn(const ExperimentConfig& config, ThresholdMethod method,
                              double e_max) {
    const double c_sigma = config.c_sigma;
    const Format fmt = config.precision.format;
    switch (method) {
        case ThresholdMethod::Vabft:
            return [e_max, c_sigma](const Matrix& a, const Matrix& b) {
                return vabft_thresholds(a, b, VabftParams{e_max, c_sigma});
            };
        case ThresholdMethod::AabftFixedY: {
            AabftParams p = AabftParams::for_format(fmt);
            p.fixed_y = 21.0;
            return [p](const Matrix& a, const Matrix& b) {
                return aabft_threshold(a, b, p).per_row;
            };
        }
        case ThresholdMethod::AabftComputedY: {
            AabftParams p = AabftParams::for_format(fmt);
            p.fixed_y.reset();
            return [p](const Matrix& a, const Matrix& b) {
                return aabft_threshold(a, b, p).per_row;
            };
        }
    }
    throw std::logic_error("bad method");
}

nlohmann::json run_tightness(const ExperimentConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    check_dims(config);
    if (config.precision.format == Format::FP64 &&
        std::max({config.m, config.k, config.n}) > 512)
        throw std::invalid_argument(
            "FP64 tightness uses the high-precision oracle; cap dims at 512 "
            "(use --precision fp32 or smaller dims)");

    const EmaxInfo emax = resolve_run_e_max(config);
    std::vector<ThresholdFn> fns;
    for (const ThresholdMethod m : config.methods)
        fns.push_back(make_threshold_fn(config, m, emax.value));

    const size_t n_methods = config.methods.size();
    const int64_t trials = config.trials;
    std::vector<double> trial_mean_actual(static_cast<size_t>(trials));
    std::vector<double> trial_max_actual(static_cast<size_t>(trials));
    std::vector<std::vector<double>> trial_mean_threshold(
        n_methods, std::vector<double>(size_t(trials)));
    std::vector<std::vector<int64_t>> rows_not_covered(n_methods,
                                                       std::vector<int64_t>(size_t(trials), 0));

    parallel_for(trials, [&](int64_t trial) {
        Philox rng(config.seed, uint64_t(trial));
        const Matrix a = random_matrix(config.m, config.k, config.dist, config.precision, rng);
        const Matrix b = random_matrix(config.k, config.n, config.dist, config.precision, rng);
        const EncodedProduct prod = encode_and_multiply(a, b, config.mode);
        const std::vector<double> actual = baseline_row_diffs(prod);

        double sum = 0.0, mx = 0.0;
        for (const double v : actual) {
            sum += v;
            mx = std::max(mx, v);
        }
        trial_mean_actual[size_t(trial)] = sum / double(actual.size());
        trial_max_actual[size_t(trial)] = mx;

        for (size_t mi = 0; mi < n_methods; ++mi) {
            const std::vector<double> thr = fns[mi](a, b);
            double tsum = 0.0;
            int64_t uncovered = 0;
            for (size_t i = 0; i < thr.size(); ++i) {
                tsum += thr[i];
                if (actual[i] > thr[i]) ++uncovered;
            }
            trial_mean_threshold[mi][size_t(trial)] = tsum / double(thr.size());
            rows_not_covered[mi][size_t(trial)] = uncovered;
        }
    });

    double mean_actual = 0.0, max_actual = 0.0;
    for (int64_t t = 0; t < trials; ++t) {
        mean_actual += trial_mean_actual[size_t(t)];
        max_actual = std::max(max_actual, trial_max_actual[size_t(t)]);
    }
    mean_actual /= double(trials);

    nlohmann::json j;
    j["config"] = config.echo("tightness");
    j["config"]["e_max"] = {{"value", emax.value}, {"source", emax.source}};
    j["actual"] = {{"mean", mean_actual},
                   {"max", max_actual},
                   {"per_trial_mean", trial_mean_actual},
                   {"per_trial_max", trial_max_actual}};
    const bool degenerate = mean_actual == 0.0;
    j["degenerate"] = degenerate;

    nlohmann::json methods = nlohmann::json::object();
    for (size_t mi = 0; mi < n_methods; ++mi) {
        double mean_thr = 0.0;
        int64_t uncovered = 0;
        for (int64_t t = 0; t < trials; ++t) {
            mean_thr += trial_mean_threshold[mi][size_t(t)];
            uncovered += rows_not_covered[mi][size_t(t)];
        }
        mean_thr /= double(trials);
        nlohmann::json mj;
        mj["mean_threshold"] = mean_thr;
        mj["per_trial_mean_threshold"] = trial_mean_threshold[mi];
        mj["rows_not_covered"] = uncovered;
        if (degenerate)
            mj["tightness"] = nullptr;
        else
            mj["tightness"] = mean_thr / mean_actual;
        methods[method_name(config.methods[mi])] = mj;
    }
    j["methods"] = methods;

    if (!config.csv_path.empty()) {
        std::ofstream csv(config.csv_path);
        csv << "trial,mean_actual,max_actual";
        for (const ThresholdMethod m : config.methods) csv << ",mean_threshold_" << method_name(m);
        csv << "\n";
        csv.precision(17);
        for (int64_t t = 0; t < trials; ++t) {
            csv << t << ',' << trial_mean_actual[size_t(t)] << ',' << trial_max_actual[size_t(t)];
            for (size_t mi = 0; mi < n_methods; ++mi)
                csv << ',' << trial_mean_threshold[mi][size_t(t)];
            csv << "\n";
        }
    }

    j["wall_time_s"] = elapsed_s(t0);
    return j;
}

nlohmann::json run_fpr(const ExperimentConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    check_dims(config);
    const EmaxInfo emax = resolve_run_e_max(config);
    std::vector<ThresholdFn> fns;
    for (const ThresholdMethod m : config.methods)
        fns.push_back(make_threshold_fn(config, m, emax.value));

    const size_t n_methods = config.methods.size();
    const int64_t trials = config.trials;
    std::vector<std::vector<int64_t>> fp_rows(n_methods, std::vector<int64_t>(size_t(trials), 0));
    std::vector<double> trial_max_d1(size_t(trials), 0.0);
    std::vector<std::vector<double>> trial_mean_thr(n_methods,
                                                    std::vector<double>(size_t(trials), 0.0));

    parallel_for(trials, [&](int64_t trial) {
        Philox rng(config.seed, uint64_t(trial));
        const Matrix a = random_matrix(config.m, config.k, config.dist, config.precision, rng);
        const Matrix b = random_matrix(config.k, config.n, config.dist, config.precision, rng);
        const EncodedProduct prod = encode_and_multiply(a, b, config.mode);
        const auto [r1, r2] = row_sums(prod.verification_source(), prod.checksum_precision);

        double mx = 0.0;
        std::vector<double> d1(static_cast<size_t>(config.m));
        for (int64_t i = 0; i < config.m; ++i) {
            d1[size_t(i)] = r1[size_t(i)] - prod.row_check1[size_t(i)];
            mx = std::max(mx, std::abs(d1[size_t(i)]));
        }
        trial_max_d1[size_t(trial)] = mx;

        for (size_t mi = 0; mi < n_methods; ++mi) {
            const std::vector<double> thr = fns[mi](a, b);
            int64_t fp = 0;
            double tsum = 0.0;
            for (int64_t i = 0; i < config.m; ++i) {
                tsum += thr[size_t(i)];
                const double d = d1[size_t(i)];
                if (std::isnan(d) || std::abs(d) > thr[size_t(i)]) ++fp;
            }
            fp_rows[mi][size_t(trial)] = fp;
            trial_mean_thr[mi][size_t(trial)] = tsum / double(config.m);
        }
    });

    double max_d1 = 0.0;
    for (const double v : trial_max_d1) max_d1 = std::max(max_d1, v);

    nlohmann::json j;
    j["config"] = config.echo("fpr");
    j["config"]["e_max"] = {{"value", emax.value}, {"source", emax.source}};
    j["max_abs_diff1"] = max_d1;
    j["rows_per_trial"] = config.m;

    nlohmann::json methods = nlohmann::json::object();
    for (size_t mi = 0; mi < n_methods; ++mi) {
        int64_t fp = 0, trials_with_fp = 0;
        double mean_thr = 0.0;
        for (int64_t t = 0; t < trials; ++t) {
            fp += fp_rows[mi][size_t(t)];
            if (fp_rows[mi][size_t(t)] > 0) ++trials_with_fp;
            mean_thr += trial_mean_thr[mi][size_t(t)];
        }
        nlohmann::json mj;
        mj["false_positive_rows"] = fp;
        mj["clean_rows"] = trials * config.m - fp;
        mj["row_fpr"] = double(fp) / double(trials * config.m);
        mj["trials_with_false_positive"] = trials_with_fp;
        mj["trial_fpr"] = double(trials_with_fp) / double(trials);
        mj["mean_threshold"] = mean_thr / double(trials);
        methods[method_name(config.methods[mi])] = mj;
    }
    j["methods"] = methods;
    j["wall_time_s"] = elapsed_s(t0);
    return j;
}

nlohmann::json run_detect_rate(const ExperimentConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    check_dims(config);
    if (config.bit_lo < 0 || config.bit_hi < config.bit_lo ||
        config.bit_hi >= config.precision.bit_width())
        throw std::invalid_argument("detect-rate: bad bit range");
    const EmaxInfo emax = resolve_run_e_max(config);

    nlohmann::json bits = nlohmann::json::object();
    for (int bit = config.bit_lo; bit <= config.bit_hi; ++bit) {
        nlohmann::json per_method = nlohmann::json::object();
        for (const ThresholdMethod m : config.methods) {
            CampaignConfig cc;
            cc.m = config.m;
            cc.k = config.k;
            cc.n = config.n;
            cc.precision = config.precision;
            cc.dist = config.dist;
            cc.bit_index = bit;
            cc.trials = config.trials;
            cc.seed = config.seed;
            cc.mode = config.mode;
            const CampaignOutcome out =
                injection_campaign(cc, make_threshold_fn(config, m, emax.value));
            nlohmann::json mj;
            mj["trials"] = out.trials;
            mj["applicable"] = out.applicable;
            mj["detected"] = out.detected;
            mj["missed"] = out.applicable - out.detected;
            mj["located_correctly"] = out.located_correctly;
            mj["nonfinite_after"] = out.nonfinite_after;
            mj["measurable"] = out.measurable();
            if (out.measurable()) {
                mj["detection_rate"] = out.detection_rate();
                mj["localization_accuracy"] =
                    out.detected > 0 ? nlohmann::json(out.localization_accuracy())
                                     : nlohmann::json();
            } else {
                mj["detection_rate"] = nullptr; // the bit is never clear at this distribution
                mj["localization_accuracy"] = nullptr;
            }
            per_method[method_name(m)] = mj;
        }
        bits[std::to_string(bit)] = per_method;
    }

    nlohmann::json j;
    j["config"] = config.echo("detect-rate");
    j["config"]["e_max"] = {{"value", emax.value}, {"source", emax.source}};
    j["config"]["bits"] = {config.bit_lo, config.bit_hi};
    j["config"]["direction"] = flip_direction_name(FlipDirection::Set0To1);
    j["bits"] = bits;
    j["wall_time_s"] = elapsed_s(t0);
    return j;
}

nlohmann::json run_calibrate(const ExperimentConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<int64_t> sizes = config.calib_sizes;
    if (sizes.empty()) sizes = {128, 256, 512};
    for (const int64_t s : sizes)
        if (s >= kLargeDim && !config.large_ok)
            throw std::invalid_argument("calibration size >= 4096 requires --large");
    const CalibrationResult r =
        calibrate(config.precision, sizes, config.trials, config.seed, config.mode);
    nlohmann::json j = nlohmann::json::parse(r.to_json_string());
    j["config"] = config.echo("calibrate");
    j["e_max_at_k"] = r.e_max_for(config.k);
    j["wall_time_s"] = elapsed_s(t0);
    return j;
}

VerifyFilesResult verify_files(const std::string& a_path, const std::string& b_path,
                               const std::optional<std::string>& check_against,
                               const ExperimentConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    const Matrix a = load_matrix_auto(a_path, config.precision);
    const Matrix b = load_matrix_auto(b_path, config.precision);
    if (a.cols() != b.rows())
        throw std::invalid_argument("verify: A's columns must equal B's rows");
    if (a.format().format != b.format().format)
        throw std::invalid_argument("verify: operand precisions disagree");

    EncodedProduct prod = encode_and_multiply(a, b, config.mode);
    if (check_against) {
        Matrix c = load_matrix_auto(*check_against, a.format());
        if (c.rows() != prod.c.rows() || c.cols() != prod.c.cols())
            throw std::invalid_argument("verify: --check-against dimensions disagree");
        if (c.format().format != prod.c.format().format)
            throw std::invalid_argument("verify: --check-against precision disagrees");
        prod.c = std::move(c);
        prod.c_accum = prod.c;
    }

    const double e_max = config.e_max_override
                             ? *config.e_max_override
                             : resolve_e_max(a.format(), a.cols());
    const std::vector<double> thresholds =
        vabft_thresholds(a, b, VabftParams{e_max, config.c_sigma});
    const std::vector<RowVerdict> verdicts = verify(prod, thresholds);

    nlohmann::json j;
    j["a"] = a_path;
    j["b"] = b_path;
    j["dims"] = {a.rows(), a.cols(), b.cols()};
    j["precision"] = a.format().name();
    j["mode"] = verify_mode_name(config.mode);
    j["e_max"] = {{"value", e_max},
                  {"source", config.e_max_override ? "override" : "format-default"}};
    j["c_sigma"] = config.c_sigma;
    if (check_against) j["check_against"] = *check_against;

    nlohmann::json rows = nlohmann::json::array();
    bool any = false;
    for (const RowVerdict& v : verdicts) {
        if (!v.detected) continue;
        any = true;
        nlohmann::json vj;
        vj["row"] = v.row;
        vj["diff1"] = std::isfinite(v.diff1) ? nlohmann::json(v.diff1) : nlohmann::json();
        vj["threshold"] = v.threshold;
        if (v.location) {
            vj["location"] = *v.location;
            vj["residual"] = v.localization_residual;
            vj["correction"] = *v.correction;
        }
        rows.push_back(vj);
    }
    j["detected"] = any;
    j["detected_rows"] = rows;
    j["wall_time_s"] = elapsed_s(t0);
    return {j, any ? 2 : 0};
}

} // namespace vabft
