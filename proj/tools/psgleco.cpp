// psgleco experiment runner: configure, launch and record multi-seed
// projected stochastic gradient experiments.
//
//   psgleco run   --config cfg.json [--strategy S2 --gamma0 0.1 ...]
//   psgleco sweep --config cfg.json [--gamma0 0.001,0.01,0.1,1,10 ...]
//
// Config files are flat JSON objects; command-line flags override file keys.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "psgleco/psgleco.hpp"

namespace {

using nlohmann::json;

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

psgleco::Strategy parse_strategy(const std::string& name) {
    if (name == "S1" || name == "s1") return psgleco::Strategy::S1;
    if (name == "S2" || name == "s2") return psgleco::Strategy::S2;
    if (name == "S3" || name == "s3") return psgleco::Strategy::S3;
    throw psgleco::ConfigError("unknown strategy '" + name + "'");
}

std::vector<double> json_double_list(const json& value) {
    if (value.is_array()) return value.get<std::vector<double>>();
    return {value.get<double>()};
}

void apply_json(psgleco::ExperimentConfig& cfg, const json& j) {
    for (const auto& [key, value] : j.items()) {
        if (key == "problem") cfg.problem = value.get<std::string>();
        else if (key == "data") cfg.data = value.get<std::string>();
        else if (key == "batch_size") cfg.batch_size = value.get<Eigen::Index>();
        else if (key == "strategy") cfg.strategy = parse_strategy(value.get<std::string>());
        else if (key == "alpha") cfg.alpha = json_double_list(value);
        else if (key == "gamma0") cfg.gamma0 = json_double_list(value);
        else if (key == "gamma1") cfg.gamma1 = value.get<double>();
        else if (key == "a") cfg.a = value.get<double>();
        else if (key == "delta_lo") cfg.delta_lo = value.get<double>();
        else if (key == "delta_hi") cfg.delta_hi = value.get<double>();
        else if (key == "bb_every") cfg.bb_every = value.get<std::int64_t>();
        else if (key == "k_max") cfg.k_max = value.get<std::int64_t>();
        else if (key == "projection") {
            const auto mode = value.get<std::string>();
            if (mode == "exact") cfg.projection = psgleco::ProjectionMode::exact;
            else if (mode == "inexact") cfg.projection = psgleco::ProjectionMode::inexact;
            else throw psgleco::ConfigError("unknown projection '" + mode + "'");
        }
        else if (key == "eta") cfg.eta = value.get<double>();
        else if (key == "mu0") cfg.mu0 = value.get<double>();
        else if (key == "rho") cfg.rho = value.get<double>();
        else if (key == "seeds") cfg.seeds = value.get<int>();
        else if (key == "base_seed") cfg.base_seed = value.get<std::uint64_t>();
        else if (key == "jobs") cfg.jobs = value.get<unsigned>();
        else if (key == "metric_every") cfg.metric_every = value.get<std::int64_t>();
        else if (key == "reshuffle_every") cfg.reshuffle_every = value.get<std::int64_t>();
        else if (key == "x0") cfg.x0 = value.get<std::string>();
        else if (key == "out_dir") cfg.out_dir = value.get<std::string>();
        else if (key == "filter_keep") cfg.filter_keep = json_double_list(value);
        else if (key == "label_map") {
            cfg.label_map.clear();
            for (const auto& pair : value) {
                cfg.label_map.emplace_back(pair.at(0).get<double>(),
                                           pair.at(1).get<double>());
            }
        }
        else if (key == "scale") cfg.scale = value.get<std::string>();
        else if (key == "scale_mode") cfg.scale_mode = value.get<std::string>();
        else if (key == "feature_dim") cfg.feature_dim = value.get<std::int32_t>();
        else if (key == "constraint_fraction") cfg.constraint_fraction = value.get<double>();
        else if (key == "constraint_seed") cfg.constraint_seed = value.get<std::uint64_t>();
        else if (key == "components") cfg.components = value.get<Eigen::Index>();
        else if (key == "sigma") cfg.sigma = value.get<double>();
        else if (key == "xi_seed") cfg.xi_seed = value.get<std::uint64_t>();
        else if (key == "svg") cfg.write_svg = value.get<bool>();
        else if (key == "log_f") cfg.log_f = value.get<bool>();
        else throw psgleco::ConfigError("unknown config key '" + key + "'");
    }
}

struct CliOverrides {
    std::string config_path;
    std::string problem, data, strategy, projection, x0, out_dir, scale, scale_mode;
    std::string alpha, gamma0;  // comma lists
    double gamma1 = -1, a = -1, delta_lo = -1, delta_hi = -1;
    double eta = -1, mu0 = -1, rho = -1, sigma = -1, constraint_fraction = -1;
    std::int64_t bb_every = -1, k_max = -1, metric_every = -1, batch_size = -1;
    std::int64_t seeds = -1, jobs = -1, components = -1;
    std::int64_t base_seed = -1, constraint_seed = -1, xi_seed = -1;
    bool no_svg = false;
};

void add_common_flags(CLI::App* cmd, CliOverrides& o) {
    cmd->add_option("--config", o.config_path, "JSON config file");
    cmd->add_option("--problem", o.problem,
                    "logistic[:<path>] | hs50 | quadratic:<n>,<m> | perturbed:<base>");
    cmd->add_option("--data", o.data, "LIBSVM dataset path (logistic)");
    cmd->add_option("--strategy", o.strategy, "S1 | S2 | S3");
    cmd->add_option("--alpha", o.alpha, "S1 step scale (comma list for sweep)");
    cmd->add_option("--gamma0", o.gamma0, "cosine-decay start (comma list for sweep)");
    cmd->add_option("--gamma1", o.gamma1, "cosine-decay end (default 1e-5)");
    cmd->add_option("--a", o.a, "diminishing factor a/(a+k) (default 1000)");
    cmd->add_option("--delta-lo", o.delta_lo, "step clamp lower bound (default 1e-3)");
    cmd->add_option("--delta-hi", o.delta_hi, "step clamp upper bound (default 1e2)");
    cmd->add_option("--bb-every", o.bb_every, "BB refresh cadence (default 20)");
    cmd->add_option("--k-max", o.k_max, "iteration budget (default 10000)");
    cmd->add_option("--projection", o.projection, "exact | inexact");
    cmd->add_option("--eta", o.eta, "residual budget factor (default 0.5)");
    cmd->add_option("--mu0", o.mu0, "residual budget offset (default 0.1)");
    cmd->add_option("--rho", o.rho, "residual offset decay (default 0.95)");
    cmd->add_option("--seeds", o.seeds, "number of sequential seeds (default 10)");
    cmd->add_option("--base-seed", o.base_seed, "first seed (default 1)");
    cmd->add_option("--jobs", o.jobs, "parallel runs (default 1)");
    cmd->add_option("--metric-every", o.metric_every, "diagnostic cadence (default 1)");
    cmd->add_option("--batch-size", o.batch_size, "mini-batch size (default 256)");
    cmd->add_option("--x0", o.x0, "auto | projected_origin | zero | problem_given");
    cmd->add_option("--out", o.out_dir, "output directory (or $PSGLECO_OUT)");
    cmd->add_option("--scale", o.scale, "none | unit | symmetric");
    cmd->add_option("--scale-mode", o.scale_mode, "column | global");
    cmd->add_option("--constraint-fraction", o.constraint_fraction,
                    "m = floor(fraction*n) (default 0.5)");
    cmd->add_option("--constraint-seed", o.constraint_seed, "constraint RNG seed");
    cmd->add_option("--components", o.components, "finite-sum component count N");
    cmd->add_option("--sigma", o.sigma, "perturbation scale (default 0.1)");
    cmd->add_option("--xi-seed", o.xi_seed, "perturbation RNG seed");
    cmd->add_flag("--no-svg", o.no_svg, "skip curves.svg");
}

psgleco::ExperimentConfig assemble(const CliOverrides& o) {
    psgleco::ExperimentConfig cfg;
    if (!o.config_path.empty()) {
        std::ifstream in(o.config_path);
        if (!in) throw psgleco::ConfigError("cannot open config '" + o.config_path + "'");
        json j;
        in >> j;
        apply_json(cfg, j);
    }
    if (!o.problem.empty()) cfg.problem = o.problem;
    if (!o.data.empty()) cfg.data = o.data;
    if (!o.strategy.empty()) cfg.strategy = parse_strategy(o.strategy);
    if (!o.alpha.empty()) cfg.alpha = parse_double_list(o.alpha);
    if (!o.gamma0.empty()) cfg.gamma0 = parse_double_list(o.gamma0);
    if (o.gamma1 >= 0) cfg.gamma1 = o.gamma1;
    if (o.a >= 0) cfg.a = o.a;
    if (o.delta_lo >= 0) cfg.delta_lo = o.delta_lo;
    if (o.delta_hi >= 0) cfg.delta_hi = o.delta_hi;
    if (o.bb_every >= 0) cfg.bb_every = o.bb_every;
    if (o.k_max >= 0) cfg.k_max = o.k_max;
    if (!o.projection.empty()) {
        cfg.projection = o.projection == "inexact" ? psgleco::ProjectionMode::inexact
                                                   : psgleco::ProjectionMode::exact;
    }
    if (o.eta >= 0) cfg.eta = o.eta;
    if (o.mu0 >= 0) cfg.mu0 = o.mu0;
    if (o.rho >= 0) cfg.rho = o.rho;
    if (o.seeds >= 0) cfg.seeds = static_cast<int>(o.seeds);
    if (o.base_seed >= 0) cfg.base_seed = static_cast<std::uint64_t>(o.base_seed);
    if (o.jobs >= 0) cfg.jobs = static_cast<unsigned>(o.jobs);
    if (o.metric_every >= 0) cfg.metric_every = o.metric_every;
    if (o.batch_size >= 0) cfg.batch_size = o.batch_size;
    if (!o.x0.empty()) cfg.x0 = o.x0;
    if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
    if (!o.scale.empty()) cfg.scale = o.scale;
    if (!o.scale_mode.empty()) cfg.scale_mode = o.scale_mode;
    if (o.constraint_fraction >= 0) cfg.constraint_fraction = o.constraint_fraction;
    if (o.constraint_seed >= 0) cfg.constraint_seed = static_cast<std::uint64_t>(o.constraint_seed);
    if (o.components >= 0) cfg.components = o.components;
    if (o.sigma >= 0) cfg.sigma = o.sigma;
    if (o.xi_seed >= 0) cfg.xi_seed = static_cast<std::uint64_t>(o.xi_seed);
    if (o.no_svg) cfg.write_svg = false;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Projected stochastic gradient experiments for linearly "
                 "equality-constrained finite sums"};
    app.require_subcommand(1);

    CliOverrides run_opts, sweep_opts;
    CLI::App* run_cmd = app.add_subcommand("run", "run one experiment");
    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "run one experiment per alpha/gamma0 value");
    add_common_flags(run_cmd, run_opts);
    add_common_flags(sweep_cmd, sweep_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            const psgleco::ExperimentConfig cfg = assemble(run_opts);
            const psgleco::ExperimentResult result = psgleco::run_experiment(cfg);
            std::cout << "wrote " << result.aggregate.runs.size() << " run(s) to "
                      << result.out_dir.string() << '\n';
            for (std::uint64_t seed : result.aggregate.failed_seeds) {
                std::cerr << "run with seed " << seed << " failed\n";
            }
            return result.all_completed ? 0 : 1;
        }
        const psgleco::ExperimentConfig cfg = assemble(sweep_opts);
        const psgleco::SweepResult result = psgleco::sweep(cfg);
        std::cout << "swept " << result.entries.size() << " value(s); summary in "
                  << (result.out_dir / "sweep_summary.csv").string() << '\n';
        return result.all_completed ? 0 : 1;
    } catch (const psgleco::Error& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 2;
    }
}
