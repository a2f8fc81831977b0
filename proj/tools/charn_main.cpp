#include "charn/bootstrap.hpp"
#include "charn/ecf.hpp"
#include "charn/estimation.hpp"
#include "charn/montecarlo.hpp"
#include "charn/timeseries.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";

struct CommonOptions {
    int k = 1;
    std::string kernel = "epanechnikov";
    std::string bandwidth = "silverman";
    double a_n_quantile = 0.975;
    double a_n_absolute = 0.0;
    bool has_absolute_a_n = false;
    std::string weight = "gauss";
    std::vector<double> gammas;
    int boot_reps = 400;
    std::string smooth_h = "rule";
    int burn_in = 200;
    bool no_refit = false;
    bool shrink_smoothing = false;
    int min_kept = 20;
    double alpha = 0.05;
    std::uint64_t seed = 1;
    int threads = 1;
};

void add_common_options(CLI::App& cmd, CommonOptions& opt) {
    cmd.add_option("--k", opt.k, "Number of lags tested")->capture_default_str();
    cmd.add_option("--kernel", opt.kernel, "Kernel: epanechnikov|quartic|triweight")
        ->capture_default_str();
    cmd.add_option("--bandwidth", opt.bandwidth,
                   "Bandwidth rule: silverman|fixed:<v>|power:<rho>")
        ->capture_default_str();
    cmd.add_option("--a-n-quantile", opt.a_n_quantile,
                   "Truncation quantile of |predictor|")
        ->capture_default_str();
    cmd.add_option("--a-n", opt.a_n_absolute,
                   "Absolute truncation bound (overrides the quantile)");
    cmd.add_option("--weight", opt.weight, "Weight family: gauss|laplace")
        ->capture_default_str();
    cmd.add_option("--gamma", opt.gammas,
                   "Weight gamma(s): one value for all components or k+1 values")
        ->delimiter(',');
    cmd.add_option("--boot-reps", opt.boot_reps, "Bootstrap replicates")
        ->capture_default_str();
    cmd.add_option("--smooth-h", opt.smooth_h,
                   "Residual smoothing bandwidth: rule (n^-1/4) or a value")
        ->capture_default_str();
    cmd.add_option("--burn-in", opt.burn_in, "Burn-in length for generated paths")
        ->capture_default_str();
    cmd.add_flag("--no-refit", opt.no_refit,
                 "Reuse original estimates on bootstrap series (fast mode)");
    cmd.add_flag("--shrink-smoothing", opt.shrink_smoothing,
                 "Rescale smoothed innovations by 1/sqrt(1+h^2)");
    cmd.add_option("--min-kept", opt.min_kept, "Minimum observations after truncation")
        ->capture_default_str();
    cmd.add_option("--alpha", opt.alpha, "Significance level")->capture_default_str();
    cmd.add_option("--seed", opt.seed, "Master seed")->capture_default_str();
    cmd.add_option("--threads", opt.threads, "Worker threads")->capture_default_str();
}

charn::KernelShape parse_kernel(const std::string& name) {
    if (name == "epanechnikov") return charn::KernelShape::Epanechnikov;
    if (name == "quartic") return charn::KernelShape::Quartic;
    if (name == "triweight") return charn::KernelShape::Triweight;
    throw CLI::ValidationError("--kernel", "unknown kernel '" + name + "'");
}

charn::BandwidthSpec parse_bandwidth(const std::string& text) {
    if (text == "silverman") return charn::BandwidthSpec::silverman();
    if (text.rfind("fixed:", 0) == 0) {
        return charn::BandwidthSpec::fixed(std::stod(text.substr(6)));
    }
    if (text.rfind("power:", 0) == 0) {
        return charn::BandwidthSpec::power_law(std::stod(text.substr(6)));
    }
    throw CLI::ValidationError("--bandwidth", "expected silverman|fixed:<v>|power:<rho>");
}

charn::FitConfig resolve_fit(const CommonOptions& opt) {
    charn::FitConfig fit;
    fit.kernel.shape = parse_kernel(opt.kernel);
    fit.bandwidth = parse_bandwidth(opt.bandwidth);
    if (opt.has_absolute_a_n) {
        fit.truncation = charn::TruncationSpec::fixed(opt.a_n_absolute);
    } else {
        fit.truncation = charn::TruncationSpec::at_quantile(opt.a_n_quantile);
    }
    return fit;
}

charn::WeightSpec resolve_weight(const CommonOptions& opt) {
    charn::WeightFamily family;
    double default_gamma;
    if (opt.weight == "gauss") {
        family = charn::WeightFamily::GaussianProduct;
        default_gamma = 0.5;
    } else if (opt.weight == "laplace") {
        family = charn::WeightFamily::LaplaceProduct;
        default_gamma = 1.0;
    } else {
        throw CLI::ValidationError("--weight", "expected gauss or laplace");
    }
    std::vector<double> gammas = opt.gammas;
    const std::size_t needed = static_cast<std::size_t>(opt.k) + 1;
    if (gammas.empty()) {
        gammas.assign(needed, default_gamma);
    } else if (gammas.size() == 1) {
        gammas.assign(needed, gammas.front());
    } else if (gammas.size() != needed) {
        throw CLI::ValidationError("--gamma", "expected 1 or k+1 values");
    }
    return {family, gammas};
}

charn::BootstrapConfig resolve_bootstrap(const CommonOptions& opt) {
    charn::BootstrapConfig boot;
    boot.replicates = opt.boot_reps;
    if (opt.smooth_h == "rule") {
        boot.smoothing = charn::SmoothingBandwidth::rule();
    } else {
        boot.smoothing = charn::SmoothingBandwidth::fixed(std::stod(opt.smooth_h));
    }
    boot.burn_in = opt.burn_in;
    boot.alpha = opt.alpha;
    boot.seed = opt.seed;
    boot.refit = !opt.no_refit;
    boot.shrink_smoothing = opt.shrink_smoothing;
    boot.min_kept = opt.min_kept;
    return boot;
}

ordered_json common_manifest(const std::string& subcommand, const CommonOptions& opt) {
    ordered_json m;
    m["subcommand"] = subcommand;
    m["version"] = kVersion;
    m["k"] = opt.k;
    m["kernel"] = opt.kernel;
    m["bandwidth"] = opt.bandwidth;
    if (opt.has_absolute_a_n) {
        m["a_n"] = opt.a_n_absolute;
    } else {
        m["a_n_quantile"] = opt.a_n_quantile;
    }
    m["weight"] = opt.weight;
    m["gamma"] = resolve_weight(opt).gammas;
    m["boot_reps"] = opt.boot_reps;
    m["smooth_h"] = opt.smooth_h;
    m["burn_in"] = opt.burn_in;
    m["refit"] = !opt.no_refit;
    m["shrink_smoothing"] = opt.shrink_smoothing;
    m["min_kept"] = opt.min_kept;
    m["alpha"] = opt.alpha;
    m["seed"] = opt.seed;
    m["threads"] = opt.threads;
    return m;
}

std::vector<double> read_series_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open input file '" + path + "'");
    }
    std::vector<double> values;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        std::size_t begin = line.find_first_not_of(" \t\r");
        if (begin == std::string::npos) continue;  // blank line
        std::size_t end = line.find_last_not_of(" \t\r");
        const std::string token = line.substr(begin, end - begin + 1);
        char* parse_end = nullptr;
        const double value = std::strtod(token.c_str(), &parse_end);
        if (parse_end != token.c_str() + token.size() || !std::isfinite(value)) {
            throw std::runtime_error("parse error at line " +
                                     std::to_string(line_number) + ": '" + token + "'");
        }
        values.push_back(value);
    }
    return values;
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open output file '" + path + "'");
    }
    out << content;
}

int run_test_command(const CommonOptions& opt, const std::string& input_path,
                     const std::string& out_path, bool exit_on_reject) {
    const std::vector<double> values = read_series_file(input_path);
    const int min_n = std::max(opt.min_kept + 1, 21);
    if (static_cast<int>(values.size()) < opt.k + min_n) {
        throw std::runtime_error(
            "series too short: got " + std::to_string(values.size()) +
            " values; need at least " + std::to_string(opt.k + min_n) + " (" +
            std::to_string(opt.k) + " pre-sample lags + n >= " +
            std::to_string(min_n) + ")");
    }
    const charn::TimeSeries series(values, opt.k);
    const charn::TestReport report =
        charn::bootstrap_test(series, opt.k, resolve_fit(opt), resolve_weight(opt),
                              resolve_bootstrap(opt), opt.threads);

    ordered_json j;
    j["statistic"] = report.statistic;
    j["critical_value"] = report.critical_value;
    j["p_value"] = report.p_value;
    j["reject"] = report.reject;
    j["alpha"] = report.alpha;
    j["sample_size"] = report.sample_size;
    j["kept_count"] = report.kept_count;
    j["bandwidth"] = report.bandwidth;
    j["truncation"] = report.truncation;
    j["smoothing_h"] = report.smoothing_h;
    j["divergent_replicates"] = report.divergent_replicates;
    j["bootstrap_statistics"] = report.bootstrap_statistics;
    ordered_json manifest = common_manifest("test", opt);
    manifest["input"] = input_path;
    manifest["out"] = out_path;
    manifest["exit_on_reject"] = exit_on_reject;
    j["config"] = manifest;

    write_output(out_path, j.dump(2) + "\n");
    return (exit_on_reject && report.reject) ? 2 : 0;
}

struct SimulateOptions {
    std::string model = "ar";
    std::string hypothesis = "null";
    int n = 200;
    int k = 1;
    double skew_coefficient = 10.0;
    int burn_in = 200;
    std::uint64_t seed = 1;
    std::string out;
};

charn::ModelId parse_model(const std::string& name) {
    if (name == "ar" || name == "i") return charn::ModelId::Ar;
    if (name == "arch" || name == "ii") return charn::ModelId::Arch;
    throw CLI::ValidationError("--model", "expected ar|arch");
}

charn::Hypothesis parse_hypothesis(const std::string& name) {
    if (name == "null") return charn::Hypothesis::Null;
    if (name == "alternative" || name == "alt") return charn::Hypothesis::Alternative;
    throw CLI::ValidationError("--hypothesis", "expected null|alternative");
}

int run_simulate_command(const SimulateOptions& opt) {
    const charn::CharnModel model =
        charn::make_model(parse_model(opt.model), parse_hypothesis(opt.hypothesis),
                          opt.skew_coefficient, opt.burn_in);
    const charn::TimeSeries series = charn::simulate(model, opt.n, opt.k, opt.seed);
    std::ostringstream body;
    char buffer[64];
    for (double v : series.values()) {
        std::snprintf(buffer, sizeof(buffer), "%.17g\n", v);
        body << buffer;
    }
    write_output(opt.out, body.str());
    return 0;
}

struct MonteCarloOptions {
    std::string model = "both";
    std::string hypothesis = "both";
    std::vector<int> n_list;
    std::vector<double> alphas;
    int mc_reps = 200;
    double skew_coefficient = 10.0;
    bool paper_scale = false;
    std::string out_csv;
};

int run_montecarlo_command(const CommonOptions& opt, const MonteCarloOptions& mc) {
    std::vector<charn::ModelId> models;
    if (mc.model == "both") {
        models = {charn::ModelId::Ar, charn::ModelId::Arch};
    } else {
        models = {parse_model(mc.model)};
    }
    std::vector<charn::Hypothesis> hypotheses;
    if (mc.hypothesis == "both") {
        hypotheses = {charn::Hypothesis::Null, charn::Hypothesis::Alternative};
    } else {
        hypotheses = {parse_hypothesis(mc.hypothesis)};
    }

    charn::ExperimentConfig base;
    base.n_list = mc.n_list;
    base.alphas = mc.alphas;
    base.mc_replicates = mc.mc_reps;
    base.k = opt.k;
    base.skew_coefficient = mc.skew_coefficient;
    base.fit = resolve_fit(opt);
    base.weight = resolve_weight(opt);
    base.bootstrap = resolve_bootstrap(opt);
    base.master_seed = opt.seed;

    charn::RejectionTable table;
    for (charn::ModelId model : models) {
        for (charn::Hypothesis hypothesis : hypotheses) {
            charn::ExperimentConfig cfg = base;
            cfg.model = model;
            cfg.hypothesis = hypothesis;
            charn::append_experiment(table, cfg, opt.threads);
        }
    }

    ordered_json manifest = common_manifest("montecarlo", opt);
    manifest["model"] = mc.model;
    manifest["hypothesis"] = mc.hypothesis;
    manifest["mc_reps"] = mc.mc_reps;
    manifest["skew_coeff"] = mc.skew_coefficient;
    manifest["paper_scale"] = mc.paper_scale;
    manifest["out_csv"] = mc.out_csv;
    {
        std::ostringstream list;
        for (std::size_t i = 0; i < base.n_list.size(); ++i) {
            if (i) list << ",";
            list << base.n_list[i];
        }
        manifest["n_list"] = list.str();
    }
    {
        std::ostringstream list;
        for (std::size_t i = 0; i < base.alphas.size(); ++i) {
            if (i) list << ",";
            list << base.alphas[i];
        }
        manifest["alphas"] = list.str();
    }

    std::vector<std::pair<std::string, std::string>> comments;
    for (const auto& [key, value] : manifest.items()) {
        comments.emplace_back(key, value.is_string()
                                       ? value.get<std::string>()
                                       : value.dump());
    }

    std::ostringstream csv;
    charn::write_csv(csv, table, comments);
    if (mc.out_csv.empty()) {
        std::cout << csv.str();
    } else {
        write_output(mc.out_csv, csv.str());
        charn::write_text(std::cout, table);
    }
    std::fprintf(stderr, "montecarlo wall time: %.1f s\n", table.wall_seconds);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Innovation-independence test for nonparametric AR(1)-ARCH(1) models"};
    app.set_version_flag("--version", kVersion);
    app.set_config("--config", "", "Flat key=value configuration file");
    app.require_subcommand(1);

    CommonOptions test_opt;
    std::string test_input, test_out;
    bool exit_on_reject = false;
    CLI::App* test_cmd =
        app.add_subcommand("test", "Run the independence test on a series file "
                                   "(one value per line, oldest first; the first "
                                   "k values are the pre-sample lags)");
    test_cmd->add_option("input", test_input, "Input series file")->required();
    add_common_options(*test_cmd, test_opt);
    test_cmd->add_option("--out", test_out, "JSON report path (default stdout)");
    test_cmd->add_flag("--exit-on-reject", exit_on_reject,
                       "Exit with code 2 when the test rejects");

    SimulateOptions sim_opt;
    CLI::App* sim_cmd = app.add_subcommand("simulate", "Generate a series from one "
                                                       "of the study models");
    sim_cmd->add_option("--model", sim_opt.model, "ar|arch")->capture_default_str();
    sim_cmd->add_option("--hypothesis", sim_opt.hypothesis, "null|alternative")
        ->capture_default_str();
    sim_cmd->add_option("--n", sim_opt.n, "Observations")->capture_default_str();
    sim_cmd->add_option("--k", sim_opt.k, "Pre-sample lags")->capture_default_str();
    sim_cmd->add_option("--skew-coeff", sim_opt.skew_coefficient,
                        "Asymmetry coefficient under the alternative")
        ->capture_default_str();
    sim_cmd->add_option("--burn-in", sim_opt.burn_in, "Burn-in steps")
        ->capture_default_str();
    sim_cmd->add_option("--seed", sim_opt.seed, "Seed")->capture_default_str();
    sim_cmd->add_option("--out", sim_opt.out, "Output path (default stdout)");

    CommonOptions mc_common;
    mc_common.boot_reps = 200;
    MonteCarloOptions mc_opt;
    CLI::App* mc_cmd = app.add_subcommand(
        "montecarlo", "Size/power study over a grid of sample sizes and levels");
    add_common_options(*mc_cmd, mc_common);
    mc_cmd->add_option("--model", mc_opt.model, "ar|arch|both")->capture_default_str();
    mc_cmd->add_option("--hypothesis", mc_opt.hypothesis, "null|alternative|both")
        ->capture_default_str();
    auto* n_list_opt =
        mc_cmd->add_option("--n-list", mc_opt.n_list, "Sample sizes")->delimiter(',');
    auto* alphas_opt =
        mc_cmd->add_option("--alphas", mc_opt.alphas, "Levels")->delimiter(',');
    auto* mc_reps_opt = mc_cmd->add_option("--mc-reps", mc_opt.mc_reps,
                                           "Monte Carlo replicates per cell")
                            ->capture_default_str();
    mc_cmd->add_option("--skew-coeff", mc_opt.skew_coefficient,
                       "Asymmetry coefficient under the alternative")
        ->capture_default_str();
    mc_cmd->add_flag("--paper-scale", mc_opt.paper_scale,
                     "Full-scale grid: n up to 400 with 400/400 replicates");
    mc_cmd->add_option("--out-csv", mc_opt.out_csv, "CSV output path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (test_cmd->parsed()) {
            test_opt.has_absolute_a_n = test_cmd->count("--a-n") > 0;
            return run_test_command(test_opt, test_input, test_out, exit_on_reject);
        }
        if (sim_cmd->parsed()) {
            return run_simulate_command(sim_opt);
        }
        mc_common.has_absolute_a_n = mc_cmd->count("--a-n") > 0;
        if (mc_opt.paper_scale) {
            if (n_list_opt->count() == 0) mc_opt.n_list = {50, 100, 200, 300, 400};
            if (mc_reps_opt->count() == 0) mc_opt.mc_reps = 400;
            if (mc_cmd->count("--boot-reps") == 0) mc_common.boot_reps = 400;
        }
        if (n_list_opt->count() == 0 && mc_opt.n_list.empty()) {
            mc_opt.n_list = {50, 100, 200};
        }
        if (alphas_opt->count() == 0 && mc_opt.alphas.empty()) {
            mc_opt.alphas = {0.01, 0.05, 0.1};
        }
        return run_montecarlo_command(mc_common, mc_opt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
