#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "psgleco/constraintgen.hpp"
#include "psgleco/errors.hpp"
#include "psgleco/ingest.hpp"
#include "psgleco/objectives.hpp"
#include "psgleco/solver.hpp"
#include "psgleco/steplength.hpp"

namespace psgleco {

// Full description of one experiment: problem selection, data preparation,
// step strategy, projection control, and the multi-seed execution plan.
// alpha (S1) and gamma0 (S2/S3) may hold several values; run_experiment
// requires exactly one, sweep fans out over the list.
struct ExperimentConfig {
    std::string problem = "hs50";  // logistic[:<path>] | hs50 | quadratic:<n>,<m> | perturbed:<base>
    std::string data;              // LIBSVM path (logistic)

    Eigen::Index batch_size = 256;
    Strategy strategy = Strategy::S2;
    std::vector<double> alpha = {0.1};
    std::vector<double> gamma0 = {0.1};
    double gamma1 = 1e-5;
    double a = 1000.0;
    double delta_lo = 1e-3;
    double delta_hi = 1e2;
    std::int64_t bb_every = 20;
    std::int64_t k_max = 10000;

    ProjectionMode projection = ProjectionMode::exact;
    double eta = 0.5;
    double mu0 = 0.1;
    double rho = 0.95;

    int seeds = 10;
    std::uint64_t base_seed = 1;
    unsigned jobs = 1;
    std::int64_t metric_every = 1;
    std::int64_t reshuffle_every = 0;
    std::string x0 = "auto";  // auto | projected_origin | zero | problem_given
    std::string out_dir;

    // dataset preparation (logistic)
    std::vector<double> filter_keep;
    std::vector<std::pair<double, double>> label_map;
    std::string scale = "none";         // none | unit | symmetric
    std::string scale_mode = "column";  // column | global
    std::int32_t feature_dim = 0;       // 0 = use max index seen

    double constraint_fraction = 0.5;
    std::uint64_t constraint_seed = 0;

    // perturbed / quadratic family
    Eigen::Index components = 0;  // 0 = problem default (10000 perturbed, 1 quadratic)
    double sigma = 0.1;
    std::uint64_t xi_seed = 0;

    bool write_svg = true;
    bool log_f = true;
};

// A fully assembled problem: objective, constraints, and the default start.
struct ProblemInstance {
    std::shared_ptr<FiniteSumObjective> objective;
    ConstraintSystem system;
    X0Mode x0_mode = X0Mode::projected_origin;
    Vector x0_given;
    std::string name;
};

namespace detail {

inline std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline SmoothFunction quadratic_stand_in(Eigen::Index n, std::uint64_t seed) {
    RngStream rng(seed);
    Matrix M(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) M(i, j) = rng.normal();
    auto H = std::make_shared<Matrix>(M.transpose() * M / static_cast<double>(n) +
                                      Matrix::Identity(n, n));
    auto c = std::make_shared<Vector>(n);
    for (Eigen::Index i = 0; i < n; ++i) (*c)(i) = rng.normal();
    SmoothFunction f;
    f.n = n;
    f.value = [H, c](const Vector& x) { return 0.5 * x.dot(*H * x) + c->dot(x); };
    f.gradient = [H, c](const Vector& x) { return (*H * x + *c).eval(); };
    return f;
}

inline bool parse_index_pair(const std::string& text, Eigen::Index& first,
                             Eigen::Index& second) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) return false;
    try {
        first = std::stoll(text.substr(0, comma));
        second = std::stoll(text.substr(comma + 1));
    } catch (const std::exception&) {
        return false;
    }
    return true;
}

} // namespace detail

inline ProblemInstance build_problem(const ExperimentConfig& cfg) {
    ProblemInstance inst;

    auto auto_x0 = [&](X0Mode problem_default) {
        if (cfg.x0 == "auto") return problem_default;
        if (cfg.x0 == "projected_origin") return X0Mode::projected_origin;
        if (cfg.x0 == "zero") return X0Mode::zero;
        if (cfg.x0 == "problem_given") return X0Mode::problem_given;
        throw ConfigError("unknown x0 mode '" + cfg.x0 + "'");
    };
    // Exact runs start from the projected origin, inexact runs from zero.
    const X0Mode data_driven_default = cfg.projection == ProjectionMode::exact
                                           ? X0Mode::projected_origin
                                           : X0Mode::zero;

    if (cfg.problem == "hs50") {
        Hs50 hs = hs50_base();
        inst.objective = std::make_shared<PerturbedProblem>(hs.objective,
                                                            Vector::Zero(1));
        inst.system = build_constraint_system(hs.A, hs.b);
        inst.x0_mode = auto_x0(X0Mode::problem_given);
        inst.x0_given = hs.x0;
        inst.name = "hs50";
        return inst;
    }

    if (cfg.problem.rfind("quadratic:", 0) == 0) {
        Eigen::Index n = 0, m = 0;
        if (!detail::parse_index_pair(cfg.problem.substr(10), n, m)) {
            throw ConfigError("expected quadratic:<n>,<m>, got '" + cfg.problem + "'");
        }
        const Eigen::Index components = cfg.components > 0 ? cfg.components : 1;
        QuadraticOracle oracle = quadratic_oracle(n, m, components, cfg.constraint_seed);
        inst.objective = oracle.problem;
        inst.system = std::move(oracle.system);
        inst.x0_mode = auto_x0(data_driven_default);
        inst.name = "quadratic";
        return inst;
    }

    if (cfg.problem.rfind("perturbed:", 0) == 0) {
        const std::string base = cfg.problem.substr(10);
        const Eigen::Index components = cfg.components > 0 ? cfg.components : 10000;
        SmoothFunction f;
        if (base == "hs50") {
            Hs50 hs = hs50_base();
            f = hs.objective;
            inst.system = build_constraint_system(hs.A, hs.b);
            inst.x0_mode = auto_x0(X0Mode::problem_given);
            inst.x0_given = hs.x0;
        } else if (base == "dtoc1l" || base == "huestis") {
            // Base formulas are not reproduced here; a convex quadratic
            // stand-in honors the original (n, m) dimensions.
            const Eigen::Index n = base == "dtoc1l" ? 58 : 10;
            const Eigen::Index m = base == "dtoc1l" ? 36 : 2;
            f = detail::quadratic_stand_in(n, cfg.constraint_seed + 1);
            RngStream rng(cfg.constraint_seed);
            GeneratedConstraints gen = random_constraints(
                n, static_cast<double>(m) / static_cast<double>(n), rng);
            inst.system = build_constraint_system(gen.A, gen.b);
            inst.x0_mode = auto_x0(X0Mode::projected_origin);
        } else {
            throw ConfigError("unknown perturbed base '" + base + "'");
        }
        inst.objective = std::make_shared<PerturbedProblem>(std::move(f), components,
                                                            cfg.sigma, cfg.xi_seed);
        inst.name = "perturbed_" + base;
        return inst;
    }

    if (cfg.problem == "logistic" || cfg.problem.rfind("logistic:", 0) == 0) {
        std::string path = cfg.data;
        if (cfg.problem.size() > 9) path = cfg.problem.substr(9);
        if (path.empty()) {
            throw ConfigError("logistic problem needs a dataset path "
                              "(problem=logistic:<path> or --data)");
        }
        Dataset d = parse_libsvm_file(path);
        if (!cfg.filter_keep.empty()) d = filter_classes(d, cfg.filter_keep);
        if (!cfg.label_map.empty()) d = remap_labels(std::move(d), cfg.label_map);
        if (cfg.scale != "none") {
            const ScaleRange range = cfg.scale == "unit" ? ScaleRange::unit
                                   : cfg.scale == "symmetric"
                                       ? ScaleRange::symmetric
                                       : throw ConfigError("unknown scale '" +
                                                           cfg.scale + "'");
            const ScaleMode mode = cfg.scale_mode == "global" ? ScaleMode::global
                                                              : ScaleMode::column;
            d = scale_features(d, range, mode);
        }
        SparseRowMatrix Z = to_sparse(d, cfg.feature_dim);
        const Eigen::Index n = Z.cols();
        RngStream rng(cfg.constraint_seed);
        GeneratedConstraints gen = random_constraints(n, cfg.constraint_fraction, rng);
        inst.objective =
            std::make_shared<LogisticProblem>(std::move(Z), labels_vector(d));
        inst.system = build_constraint_system(gen.A, gen.b);
        inst.x0_mode = auto_x0(data_driven_default);
        inst.name = "logistic";
        return inst;
    }

    throw ConfigError("unknown problem '" + cfg.problem + "'");
}

inline StepConfig make_step_config(const ExperimentConfig& cfg, double value) {
    StepConfig sc;
    sc.delta_lo = cfg.delta_lo;
    sc.delta_hi = cfg.delta_hi;
    sc.strategy = cfg.strategy;
    sc.alpha_const = value;
    sc.gamma0 = value;
    sc.gamma1 = cfg.gamma1;
    sc.a = cfg.a;
    sc.k_max = cfg.k_max;
    sc.bb_update_every = cfg.bb_every;
    return sc;
}

inline SolverConfig make_solver_config(const ExperimentConfig& cfg,
                                       const ProblemInstance& inst) {
    SolverConfig sol;
    sol.k_max = cfg.k_max;
    sol.projection_mode = cfg.projection;
    sol.eta = cfg.eta;
    sol.mu0 = cfg.mu0;
    sol.rho = cfg.rho;
    sol.metric_every = cfg.metric_every;
    sol.x0_mode = inst.x0_mode;
    sol.x0_given = inst.x0_given;
    sol.reshuffle_every = cfg.reshuffle_every;
    sol.log_f = cfg.log_f;
    return sol;
}

inline std::vector<std::uint64_t> seed_list(const ExperimentConfig& cfg) {
    std::vector<std::uint64_t> seeds;
    seeds.reserve(static_cast<std::size_t>(cfg.seeds));
    for (int i = 0; i < cfg.seeds; ++i) {
        seeds.push_back(cfg.base_seed + static_cast<std::uint64_t>(i));
    }
    return seeds;
}

namespace detail {

inline void write_run_csv(const std::filesystem::path& path, const RunRecord& rec) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << "k,f,d_norm,e,delta_cap,alpha,cg_iters\n";
    for (const RunRow& row : rec.rows) {
        out << row.k << ',' << format_full(row.f) << ',' << format_full(row.d_norm)
            << ',' << format_full(row.e) << ',' << format_full(row.Delta) << ','
            << format_full(row.alpha) << ',' << row.cg_iters << '\n';
    }
}

inline void write_aggregate_csv(const std::filesystem::path& path,
                                const AggregateRecord& agg) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << "k,d_norm_mean,d_norm_min,d_norm_max,e_mean,e_min,e_max\n";
    for (std::size_t i = 0; i < agg.ks.size(); ++i) {
        out << agg.ks[i] << ',' << format_full(agg.d_mean[i]) << ','
            << format_full(agg.d_min[i]) << ',' << format_full(agg.d_max[i]) << ','
            << format_full(agg.e_mean[i]) << ',' << format_full(agg.e_min[i]) << ','
            << format_full(agg.e_max[i]) << '\n';
    }
}

inline const char* strategy_name(Strategy s) {
    switch (s) {
        case Strategy::S1: return "S1";
        case Strategy::S2: return "S2";
        case Strategy::S3: return "S3";
    }
    return "?";
}

inline void write_summary(const std::filesystem::path& path,
                          const ExperimentConfig& cfg, double value,
                          const AggregateRecord& agg) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    double min_mean_d = std::numeric_limits<double>::infinity();
    double min_mean_e = std::numeric_limits<double>::infinity();
    for (double v : agg.d_mean) min_mean_d = std::min(min_mean_d, v);
    for (double v : agg.e_mean) min_mean_e = std::min(min_mean_e, v);
    out << "problem " << cfg.problem << '\n'
        << "strategy " << strategy_name(cfg.strategy) << '\n'
        << (cfg.strategy == Strategy::S1 ? "alpha " : "gamma0 ")
        << format_full(value) << '\n'
        << "min_mean_d_norm " << format_full(min_mean_d) << '\n'
        << "min_mean_e " << format_full(min_mean_e) << '\n'
        << "min_run_d_norm " << format_full(agg.min_d_norm) << '\n'
        << "min_run_e " << format_full(agg.min_e) << '\n'
        << "seeds_completed " << agg.runs.size() << '\n'
        << "seeds_failed " << agg.failed_seeds.size() << '\n';
    for (std::uint64_t s : agg.failed_seeds) out << "failed_seed " << s << '\n';
}

// Minimal convergence plot: polylines of the mean curves on a log10 y-axis.
inline void write_svg(const std::filesystem::path& path, const AggregateRecord& agg) {
    if (agg.ks.empty()) return;
    const double width = 720, height = 480;
    const double left = 64, right = 24, top = 24, bottom = 48;

    auto log_floor = [](double v) { return std::log10(std::max(v, 1e-16)); };
    double ymin = 1e300, ymax = -1e300;
    for (double v : agg.d_mean) {
        ymin = std::min(ymin, log_floor(v));
        ymax = std::max(ymax, log_floor(v));
    }
    for (double v : agg.e_mean) {
        ymin = std::min(ymin, log_floor(v));
        ymax = std::max(ymax, log_floor(v));
    }
    ymin = std::floor(ymin);
    ymax = std::ceil(ymax);
    if (ymax <= ymin) ymax = ymin + 1;
    const double kmax = static_cast<double>(agg.ks.back());

    auto x_of = [&](double k) {
        return left + (width - left - right) * (kmax > 0 ? k / kmax : 0.0);
    };
    auto y_of = [&](double logv) {
        return top + (height - top - bottom) * (ymax - logv) / (ymax - ymin);
    };

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width
        << "' height='" << height << "'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    for (double tick = ymin; tick <= ymax; tick += 1.0) {
        const double y = y_of(tick);
        out << "<line x1='" << left << "' y1='" << y << "' x2='" << width - right
            << "' y2='" << y << "' stroke='#dddddd'/>\n";
        out << "<text x='4' y='" << y + 4 << "' font-size='12'>1e" << tick
            << "</text>\n";
    }
    auto polyline = [&](const std::vector<double>& series, const char* color) {
        out << "<polyline fill='none' stroke='" << color << "' points='";
        for (std::size_t i = 0; i < series.size(); ++i) {
            out << x_of(static_cast<double>(agg.ks[i])) << ','
                << y_of(log_floor(series[i])) << ' ';
        }
        out << "'/>\n";
    };
    polyline(agg.d_mean, "#1f77b4");
    polyline(agg.e_mean, "#d62728");
    out << "<text x='" << left << "' y='" << height - 16
        << "' font-size='12'>iteration k (0.." << agg.ks.back()
        << "); blue: mean ||d(x_k)||, red: mean ||Ax_k-b||</text>\n";
    out << "</svg>\n";
}

} // namespace detail

inline std::filesystem::path resolve_out_dir(const ExperimentConfig& cfg) {
    if (!cfg.out_dir.empty()) return cfg.out_dir;
    if (const char* env = std::getenv("PSGLECO_OUT")) return env;
    return "psgleco_out";
}

struct ExperimentResult {
    AggregateRecord aggregate;
    std::filesystem::path out_dir;
    bool all_completed = false;
};

// Runs one experiment (single alpha/gamma0 value) and writes run_<seed>.csv,
// aggregate.csv, summary.txt and curves.svg into the output directory.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    const std::vector<double>& values =
        cfg.strategy == Strategy::S1 ? cfg.alpha : cfg.gamma0;
    if (values.size() != 1) {
        throw ConfigError("run_experiment needs exactly one alpha/gamma0 value; "
                          "use sweep for lists");
    }
    ProblemInstance inst = build_problem(cfg);
    const StepConfig step_cfg = make_step_config(cfg, values[0]);
    const SolverConfig solver_cfg = make_solver_config(cfg, inst);

    ExperimentResult result;
    result.aggregate = run_many(inst.system, *inst.objective, cfg.batch_size,
                                step_cfg, solver_cfg, seed_list(cfg), cfg.jobs);
    result.out_dir = resolve_out_dir(cfg);
    std::filesystem::create_directories(result.out_dir);

    for (const RunRecord& rec : result.aggregate.runs) {
        detail::write_run_csv(
            result.out_dir / ("run_" + std::to_string(rec.seed) + ".csv"), rec);
    }
    detail::write_aggregate_csv(result.out_dir / "aggregate.csv", result.aggregate);
    detail::write_summary(result.out_dir / "summary.txt", cfg, values[0],
                          result.aggregate);
    if (cfg.write_svg) {
        detail::write_svg(result.out_dir / "curves.svg", result.aggregate);
    }
    result.all_completed = result.aggregate.failed_seeds.empty() &&
                           !result.aggregate.runs.empty();
    return result;
}

struct SweepEntry {
    double value = 0.0;
    double min_mean_d_norm = std::numeric_limits<double>::infinity();
    std::size_t failed_runs = 0;
    bool diverged = false;  // at least one run failed
    std::filesystem::path dir;
};

struct SweepResult {
    std::vector<SweepEntry> entries;  // ranked, best first
    std::filesystem::path out_dir;
    bool all_completed = false;
};

// Runs one experiment per alpha/gamma0 value; ranks values by the minimum of
// the mean d-norm curve, with diverged values last.
inline SweepResult sweep(const ExperimentConfig& cfg) {
    const std::vector<double>& values =
        cfg.strategy == Strategy::S1 ? cfg.alpha : cfg.gamma0;
    if (values.empty()) throw ConfigError("sweep needs at least one value");

    const char* param = cfg.strategy == Strategy::S1 ? "alpha" : "gamma0";
    SweepResult result;
    result.out_dir = resolve_out_dir(cfg);
    std::filesystem::create_directories(result.out_dir);
    result.all_completed = true;

    for (double value : values) {
        ExperimentConfig sub = cfg;
        if (cfg.strategy == Strategy::S1) sub.alpha = {value};
        else sub.gamma0 = {value};
        char tag[48];
        std::snprintf(tag, sizeof tag, "%s_%g", param, value);
        sub.out_dir = (result.out_dir / tag).string();

        SweepEntry entry;
        entry.value = value;
        entry.dir = sub.out_dir;
        try {
            ExperimentResult sub_result = run_experiment(sub);
            for (double v : sub_result.aggregate.d_mean) {
                entry.min_mean_d_norm = std::min(entry.min_mean_d_norm, v);
            }
            entry.failed_runs = sub_result.aggregate.failed_seeds.size();
            entry.diverged = !sub_result.aggregate.failed_seeds.empty();
        } catch (const Error&) {
            entry.diverged = true;
            entry.failed_runs = static_cast<std::size_t>(cfg.seeds);
        }
        result.all_completed = result.all_completed && !entry.diverged;
        result.entries.push_back(entry);
    }

    std::stable_sort(result.entries.begin(), result.entries.end(),
                     [](const SweepEntry& a, const SweepEntry& b) {
                         if (a.diverged != b.diverged) return !a.diverged;
                         return a.min_mean_d_norm < b.min_mean_d_norm;
                     });

    std::ofstream out(result.out_dir / "sweep_summary.csv", std::ios::binary);
    if (!out) throw IoError("cannot write sweep_summary.csv");
    out << "rank," << param << ",min_mean_d_norm,failed_runs,diverged\n";
    for (std::size_t i = 0; i < result.entries.size(); ++i) {
        const SweepEntry& e = result.entries[i];
        out << i + 1 << ',' << detail::format_full(e.value) << ','
            << detail::format_full(e.min_mean_d_norm) << ',' << e.failed_runs << ','
            << (e.diverged ? 1 : 0) << '\n';
    }
    return result;
}

} // namespace psgleco
