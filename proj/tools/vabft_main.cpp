// vabft: ABFT-protected GEMM verification experiments and one-off checks.
//
// Subcommands: calibrate, tightness, fpr, detect-rate, verify.
// Every flag can also be given in a key=value config file via --config;
// command-line flags win. VABFT_THREADS caps worker threads.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "vabft/harness.hpp"

namespace {

using vabft::ExperimentConfig;

struct CliOptions {
    ExperimentConfig cfg;
    std::string precision = "fp32";
    std::string dist = "uniform:-1,1";
    std::string dims;
    std::string bits;
    std::string accum;
    std::vector<std::string> methods;
    std::string calib_sizes;
    double e_max = -1.0; // <= 0 means unset
    std::string out_path;
};

std::vector<int64_t> parse_int_list(const std::string& text) {
    std::vector<int64_t> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(std::stoll(tok));
    return out;
}

void apply_common(CliOptions& o, const std::string& default_dims,
                  const std::vector<std::string>& default_methods) {
    ExperimentConfig& c = o.cfg;
    c.precision = vabft::PrecisionSpec::of(vabft::format_from_name(o.precision));
    if (!o.accum.empty()) {
        vabft::AccumStrategy s = c.precision.accumulation;
        if (o.accum == "sequential" || o.accum == "seq") {
            s.kind = vabft::AccumKind::NativeSequential;
        } else if (o.accum == "pairwise") {
            s.kind = vabft::AccumKind::NativePairwise;
        } else if (o.accum.rfind("blocked", 0) == 0) {
            s.kind = vabft::AccumKind::NativeBlocked;
            const size_t colon = o.accum.find(':');
            if (colon != std::string::npos) s.block_len = std::stoll(o.accum.substr(colon + 1));
        } else if (o.accum == "fp32-accum") {
            s.kind = vabft::AccumKind::Fp32AccumRoundOutput;
        } else {
            throw CLI::ValidationError("--accum", "unknown strategy: " + o.accum);
        }
        c.precision.accumulation = s;
    }
    c.dist = vabft::Distribution::parse(o.dist);

    const std::string dims_text = o.dims.empty() ? default_dims : o.dims;
    const std::vector<int64_t> d = parse_int_list(dims_text);
    if (d.size() == 1) {
        c.m = c.k = c.n = d[0];
    } else if (d.size() == 3) {
        c.m = d[0];
        c.k = d[1];
        c.n = d[2];
    } else {
        throw CLI::ValidationError("--dims", "expected S or M,K,N");
    }

    c.methods.clear();
    const std::vector<std::string>& names = o.methods.empty() ? default_methods : o.methods;
    for (const std::string& entry : names) {
        std::stringstream ss(entry);
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty())
                c.methods.push_back(vabft::method_from_name(tok, c.precision.format));
    }

    if (o.e_max > 0.0) c.e_max_override = o.e_max;
    if (!o.calib_sizes.empty()) c.calib_sizes = parse_int_list(o.calib_sizes);

    if (!o.bits.empty()) {
        const size_t dash = o.bits.find('-');
        if (dash == std::string::npos) {
            c.bit_lo = c.bit_hi = std::stoi(o.bits);
        } else {
            c.bit_lo = std::stoi(o.bits.substr(0, dash));
            c.bit_hi = std::stoi(o.bits.substr(dash + 1));
        }
    }
}

void add_common_flags(CLI::App* sub, CliOptions& o) {
    sub->add_option("--precision", o.precision, "bf16|fp16|fp32|fp64")
        ->default_val(o.precision);
    sub->add_option("--dist", o.dist,
                    "normal:mu,sigma | uniform:a,b | truncnormal:mu,sigma,lo,hi | absnormal:mu,sigma")
        ->default_val(o.dist);
    sub->add_option("--dims", o.dims, "S or M,K,N");
    sub->add_option("--trials", o.cfg.trials, "trial count")->default_val(o.cfg.trials);
    sub->add_option("--seed", o.cfg.seed, "campaign seed")->default_val(0);
    sub->add_option("--method", o.methods,
                    "vabft | aabft | aabft-fixed-y | aabft-computed-y (repeat or comma-separate)");
    sub->add_option_function<std::string>(
           "--mode", [&o](const std::string& v) { o.cfg.mode = vabft::verify_mode_from_name(v); },
           "offline|online")
        ->default_str("offline");
    sub->add_option("--e-max", o.e_max, "override e_max (otherwise calibrated)");
    sub->add_option("--c-sigma", o.cfg.c_sigma, "confidence coefficient")->default_val(2.5);
    sub->add_option("--out", o.out_path, "write the JSON report to this file");
    sub->add_flag("--large", o.cfg.large_ok, "allow dimensions >= 4096");
    sub->add_option("--accum", o.accum, "sequential | blocked[:len] | pairwise | fp32-accum");
    sub->add_option("--calib-sizes", o.calib_sizes, "auto-calibration sizes (comma list)");
    sub->add_option("--calib-trials", o.cfg.calib_trials, "auto-calibration trials per size")
        ->default_val(o.cfg.calib_trials);
    sub->set_config("--config", "", "key=value config file mirroring the flags");
}

void emit(const nlohmann::json& report, const std::string& out_path) {
    const std::string text = report.dump(2);
    std::cout << text << std::endl;
    if (!out_path.empty()) {
        std::ofstream os(out_path);
        if (!os) throw std::runtime_error("cannot write: " + out_path);
        os << text << "\n";
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"V-ABFT: variance-based adaptive thresholds for ABFT GEMM verification"};
    app.require_subcommand(1);

    CliOptions calibrate_o, tightness_o, fpr_o, detect_o, verify_o;
    calibrate_o.cfg.trials = 1000;
    tightness_o.cfg.trials = 100;
    fpr_o.cfg.trials = 10000;
    detect_o.cfg.trials = 1000;

    CLI::App* calibrate = app.add_subcommand("calibrate", "measure e_max on the emulated arithmetic");
    add_common_flags(calibrate, calibrate_o);

    CLI::App* tightness = app.add_subcommand("tightness", "threshold vs actual difference");
    tightness->add_option("--csv", tightness_o.cfg.csv_path, "per-trial rows CSV");
    add_common_flags(tightness, tightness_o);

    CLI::App* fpr = app.add_subcommand("fpr", "false positives on clean data");
    add_common_flags(fpr, fpr_o);

    CLI::App* detect = app.add_subcommand("detect-rate", "bit-flip injection detection rates");
    detect->add_option("--bits", detect_o.bits, "bit range LO-HI (default 7-14)");
    add_common_flags(detect, detect_o);

    CLI::App* verify = app.add_subcommand("verify", "verify a product of two matrix files");
    std::string a_path, b_path, c_path;
    verify->add_option("A", a_path, "left operand (binary or CSV)")->required();
    verify->add_option("B", b_path, "right operand")->required();
    verify->add_option("--check-against", c_path, "product matrix to verify instead of C=AB");
    add_common_flags(verify, verify_o);

    try {
        app.parse(argc, argv);

        if (calibrate->parsed()) {
            apply_common(calibrate_o, "128", {"vabft"});
            emit(vabft::run_calibrate(calibrate_o.cfg), calibrate_o.out_path);
        } else if (tightness->parsed()) {
            apply_common(tightness_o, "128", {"vabft", "aabft"});
            emit(vabft::run_tightness(tightness_o.cfg), tightness_o.out_path);
        } else if (fpr->parsed()) {
            apply_common(fpr_o, "128,1024,256", {"vabft"});
            emit(vabft::run_fpr(fpr_o.cfg), fpr_o.out_path);
        } else if (detect->parsed()) {
            apply_common(detect_o, "128,1024,256", {"vabft"});
            emit(vabft::run_detect_rate(detect_o.cfg), detect_o.out_path);
        } else if (verify->parsed()) {
            apply_common(verify_o, "1", {"vabft"});
            const auto result = vabft::verify_files(
                a_path, b_path,
                c_path.empty() ? std::nullopt : std::optional<std::string>(c_path),
                verify_o.cfg);
            emit(result.report, verify_o.out_path);
            return result.exit_code;
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
}
