// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion pins its tolerance in place; shared runs are
// executed once up front and reused by the criteria that inspect them.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "psgleco/psgleco.hpp"
#include "support.hpp"

using namespace psgleco;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
    double seconds = 0.0;
};

struct Check {
    int id;
    std::string name;
    double time_limit;  // seconds; 0 = unlimited
    std::function<void(Outcome&)> body;
};

void expect(Outcome& out, bool condition, const std::string& what) {
    if (!condition) {
        out.pass = false;
        if (!out.detail.empty()) out.detail += "; ";
        out.detail += what;
    }
}

std::string str(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// ------------------------------------------------------------------ shared
// Inexact desk-scale logistic run (criteria 3, 4, 6).
struct InexactRun {
    RunRecord record;
    SolverConfig solver;
    double b_norm = 0.0;
};

InexactRun shared_inexact;
std::vector<double> step_bound_violations;  // gathered from every run executed

void note_run(const RunRecord& rec) {
    step_bound_violations.push_back(rec.max_step_bound_violation);
}

void run_shared_inexact() {
    auto problem = testsupport::make_synthetic_logistic(256, 50, 2001);
    RngStream gen(0);
    GeneratedConstraints con = random_constraints(50, 0.5, gen);
    const ConstraintSystem sys = build_constraint_system(con.A, con.b);

    StepConfig step;
    step.strategy = Strategy::S2;
    step.gamma0 = 0.1;
    step.k_max = 5001;

    SolverConfig solver;
    solver.k_max = 5001;
    solver.projection_mode = ProjectionMode::inexact;
    solver.eta = 0.5;
    solver.mu0 = 0.1;
    solver.rho = 0.95;
    solver.x0_mode = X0Mode::zero;

    RngStream rng(1);
    Partition p = build_partition(256, 32, rng);
    shared_inexact.record = run(sys, *problem, p, step, solver, rng);
    shared_inexact.solver = solver;
    shared_inexact.b_norm = sys.b.norm();
    note_run(shared_inexact.record);
}

// --------------------------------------------------------------- criteria

void criterion_unbiasedness(Outcome& out) {
    RngStream rng(100);
    struct Case {
        std::shared_ptr<FiniteSumObjective> obj;
        const char* name;
    };
    std::vector<Case> cases;
    cases.push_back({testsupport::make_synthetic_logistic(128, 10, 7), "logistic"});
    cases.push_back(
        {std::make_shared<PerturbedProblem>(hs50_base().objective, 64, 0.1, 3),
         "perturbed"});
    cases.push_back({quadratic_oracle(8, 3, 8, 5).problem, "quadratic"});

    for (const Case& c : cases) {
        const Eigen::Index N = c.obj->components();
        for (const Eigen::Index batch :
             {Eigen::Index{1}, std::max<Eigen::Index>(1, N / 5), N}) {
            const Partition p = build_partition(N, batch, rng);
            for (int trial = 0; trial < 20; ++trial) {
                const Vector x = testsupport::random_vector(c.obj->dimension(), rng);
                Vector mean = Vector::Zero(c.obj->dimension());
                for (Eigen::Index i = 0; i < p.block_count(); ++i) {
                    mean += stochastic_gradient(*c.obj, x, p, i);
                }
                mean /= static_cast<double>(p.block_count());
                const Vector full = c.obj->full_gradient(x);
                const double err = (mean - full).norm() / std::max(1.0, full.norm());
                expect(out, err <= 1e-12,
                       std::string(c.name) + " rel err " + str(err));
            }
        }
    }
}

void criterion_projection(Outcome& out) {
    RngStream rng(200);
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.uniform_index(49));
        const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng.uniform_index(
                                       static_cast<std::uint64_t>(n - 1)));
        auto [A, b] = testsupport::random_constraint_pair(m, n, rng);
        const ConstraintSystem sys = build_constraint_system(A, b);
        const Vector y = 3.0 * testsupport::random_vector(n, rng);

        const Vector projected = project_exact(sys, y).point;
        const double feas = (sys.A * projected - sys.b).norm();
        expect(out, feas <= 1e-9 * (1.0 + b.norm() + y.norm()),
               "feasibility " + str(feas));
        const double idem = (project_exact(sys, projected).point - projected).norm();
        expect(out, idem <= 1e-9 * (1.0 + y.norm()), "idempotence " + str(idem));
        const double orth = apply_PA(sys, y - projected).norm();
        expect(out, orth <= 1e-9 * y.norm(), "orthogonality " + str(orth));
    }
}

void criterion_residual_contract(Outcome& out) {
    const RunRecord& rec = shared_inexact.record;
    expect(out, rec.status == RunStatus::ok, "inexact run did not complete");
    expect(out, rec.max_resb_excess <= 1e-12,
           "residual bound excess " + str(rec.max_resb_excess));
    expect(out, rec.max_identity_error <= 1e-9,
           "identity error " + str(rec.max_identity_error));
}

void criterion_infeasibility_decay(Outcome& out) {
    const RunRecord& rec = shared_inexact.record;
    expect(out, rec.status == RunStatus::ok, "inexact run did not complete");
    if (rec.rows.empty()) return;
    const double e0 = rec.rows.front().e;
    for (const RunRow& row : rec.rows) {
        const double cap = std::max(
            std::pow(0.96, static_cast<double>(row.k)) * (e0 + 1.0), 1e-8);
        if (row.e > cap) {
            expect(out, false,
                   "e(" + std::to_string(row.k) + ") = " + str(row.e) +
                       " above " + str(cap));
            break;
        }
    }
    const RunRow& last = rec.rows.back();
    expect(out, last.k == 5000, "missing k = 5000 row");
    expect(out, last.e <= 1e-6, "e(5000) = " + str(last.e));
}

void criterion_kkt_oracle(Outcome& out) {
    const QuadraticOracle oracle = quadratic_oracle(10, 5, 1, 42);
    const double L = oracle.problem->lipschitz_constant();

    StepConfig step;
    step.strategy = Strategy::S3;
    step.delta_lo = 0.999;
    step.delta_hi = 1.0;
    // constant alpha at the theoretical bound alpha <= delta_lo / (2 L delta_hi^2)
    const double alpha = step.delta_lo / (2.0 * L * step.delta_hi * step.delta_hi);
    step.gamma0 = step.gamma1 = alpha;
    step.a = std::numeric_limits<double>::infinity();
    step.k_max = 10000;

    SolverConfig solver;
    solver.k_max = 10000;
    solver.projection_mode = ProjectionMode::exact;
    solver.x0_mode = X0Mode::projected_origin;

    RngStream rng(9);
    Partition p = build_partition(1, 1, rng);
    const RunRecord rec =
        run(oracle.system, *oracle.problem, p, step, solver, rng);
    note_run(rec);
    expect(out, rec.status == RunStatus::ok, "oracle run did not complete");
    const double dist = (rec.x_final - oracle.x_star).norm();
    expect(out, dist <= 1e-6, "||x - x*|| = " + str(dist));

    for (std::size_t i = 11; i + 1 < rec.rows.size(); ++i) {
        if (rec.rows[i].d_norm <= 1e-13) break;  // machine noise floor
        if (rec.rows[i + 1].d_norm > rec.rows[i].d_norm * (1.0 + 1e-10)) {
            expect(out, false,
                   "d norm increased at k = " + std::to_string(rec.rows[i].k));
            break;
        }
    }
}

void criterion_step_bound(Outcome& out) {
    expect(out, !step_bound_violations.empty(), "no runs recorded");
    for (double v : step_bound_violations) {
        expect(out, v <= 0.0, "step bound violated by " + str(v));
    }
}

void criterion_schedule_exactness(Outcome& out) {
    StepConfig cfg;
    cfg.gamma0 = 0.1;
    cfg.gamma1 = 1e-5;
    cfg.k_max = 10000;
    const double start_err = std::abs(cosine_decay(cfg, 0) - cfg.gamma0);
    const double end_err = std::abs(cosine_decay(cfg, cfg.k_max) - cfg.gamma1);
    expect(out, start_err <= 1e-15 * cfg.gamma0, "c_0 error " + str(start_err));
    expect(out, end_err <= 1e-15 * cfg.gamma1, "c_kmax error " + str(end_err));
}

void criterion_desk_scale_stochastic(Outcome& out) {
    auto problem = testsupport::make_synthetic_logistic(512, 20, 3001);
    RngStream gen(0);
    GeneratedConstraints con = random_constraints(20, 0.5, gen);
    const ConstraintSystem sys = build_constraint_system(con.A, con.b);
    expect(out, sys.m == 10, "unexpected constraint count");

    StepConfig step;
    step.strategy = Strategy::S2;
    step.gamma0 = 0.1;
    step.k_max = 5001;

    SolverConfig solver;
    solver.k_max = 5001;
    solver.projection_mode = ProjectionMode::exact;
    solver.x0_mode = X0Mode::projected_origin;

    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s = 1; s <= 10; ++s) seeds.push_back(s);
    const AggregateRecord agg =
        run_many(sys, *problem, 64, step, solver, seeds, 4);
    for (const RunRecord& rec : agg.runs) note_run(rec);
    expect(out, agg.runs.size() == 10, "runs failed: " +
                                           std::to_string(agg.failed_seeds.size()));
    if (agg.ks.empty()) return;
    expect(out, agg.ks.back() == 5000, "missing k = 5000 row");
    const double d_start = agg.d_mean.front();
    const double d_end = agg.d_mean.back();
    expect(out, d_end <= 0.1 * d_start,
           "mean d(5000)/d(0) = " + str(d_end / d_start));
    expect(out, agg.min_d_norm <= 0.01 * d_start,
           "min-over-run ratio = " + str(agg.min_d_norm / d_start));
}

void criterion_hs50(Outcome& out) {
    const Hs50 hs = hs50_base();
    const ConstraintSystem sys = build_constraint_system(hs.A, hs.b);

    // Independent oracle: plain projected gradient at a tiny fixed step.
    Vector x = hs.x0;
    for (int i = 0; i < 300000; ++i) {
        x = project_exact(sys, x - 1e-3 * hs.objective.gradient(x)).point;
    }
    const double oracle_value = hs.objective.value(x);
    expect(out, oracle_value <= 1e-6,
           "oracle optimum estimate " + str(oracle_value));

    PerturbedProblem obj(hs.objective, Vector::Zero(1));  // unperturbed, r = 1
    StepConfig step;
    step.strategy = Strategy::S1;
    step.alpha_const = 0.5;  // tuned
    step.k_max = 10000;

    SolverConfig solver;
    solver.k_max = 10000;
    solver.projection_mode = ProjectionMode::exact;
    solver.x0_mode = X0Mode::problem_given;
    solver.x0_given = hs.x0;

    RngStream rng(4);
    Partition p = build_partition(1, 1, rng);
    const RunRecord rec = run(sys, obj, p, step, solver, rng);
    note_run(rec);
    expect(out, rec.status == RunStatus::ok, "run did not complete");
    const double final_value = hs.objective.value(rec.x_final);
    expect(out, final_value <= 1e-4, "final objective " + str(final_value));
}

void criterion_finite_differences(Outcome& out) {
    RngStream rng(500);
    struct Case {
        std::shared_ptr<FiniteSumObjective> obj;
        const char* name;
    };
    std::vector<Case> cases;
    cases.push_back({testsupport::make_synthetic_logistic(24, 6, 11), "logistic"});
    cases.push_back(
        {std::make_shared<PerturbedProblem>(hs50_base().objective, 16, 0.1, 2),
         "perturbed"});
    cases.push_back({quadratic_oracle(7, 2, 4, 8).problem, "quadratic"});
    cases.push_back(
        {std::make_shared<PerturbedProblem>(hs50_base().objective, Vector::Zero(1)),
         "hs50"});

    for (const Case& c : cases) {
        for (int trial = 0; trial < 20; ++trial) {
            const Vector x = testsupport::random_vector(c.obj->dimension(), rng);
            const Vector numeric = testsupport::fd_gradient(
                [&](const Vector& v) { return c.obj->value(v); }, x);
            const Vector analytic = c.obj->full_gradient(x);
            const double err =
                (analytic - numeric).norm() / (1.0 + numeric.norm());
            expect(out, err <= 1e-5,
                   std::string(c.name) + " fd err " + str(err));
        }
    }
}

void criterion_determinism(Outcome& out) {
    auto read_bytes = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    ExperimentConfig cfg;
    cfg.problem = "quadratic:8,4";
    cfg.strategy = Strategy::S2;
    cfg.gamma0 = {0.05};
    cfg.k_max = 200;
    cfg.seeds = 3;
    cfg.base_seed = 7;
    cfg.batch_size = 1;
    cfg.components = 4;
    cfg.write_svg = false;

    const fs::path dir_a = "acceptance_out/determinism_a";
    const fs::path dir_b = "acceptance_out/determinism_b";
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    cfg.out_dir = dir_a.string();
    const ExperimentResult first = run_experiment(cfg);
    cfg.out_dir = dir_b.string();
    const ExperimentResult second = run_experiment(cfg);
    for (const RunRecord& rec : first.aggregate.runs) note_run(rec);

    expect(out, first.all_completed && second.all_completed, "runs failed");
    for (const char* name :
         {"run_7.csv", "run_8.csv", "run_9.csv", "aggregate.csv"}) {
        const std::string a = read_bytes(dir_a / name);
        const std::string b = read_bytes(dir_b / name);
        expect(out, !a.empty() && a == b,
               std::string(name) + " differs between invocations");
    }
}

} // namespace

int main() {
    run_shared_inexact();

    std::vector<Check> checks = {
        {1, "unbiasedness identity (mean of block gradients = full gradient)", 1.0,
         criterion_unbiasedness},
        {2, "exact projection: feasibility, idempotence, orthogonality", 1.0,
         criterion_projection},
        {3, "inexact projection residual contract + infeasibility identity", 0.0,
         criterion_residual_contract},
        {4, "geometric infeasibility decay on desk-scale inexact run", 30.0,
         criterion_infeasibility_decay},
        {5, "KKT oracle convergence with theoretical constant step", 10.0,
         criterion_kkt_oracle},
        {6, "step-length bound alpha_k delta_lo <= Delta_k <= alpha_k delta_hi",
         0.0, criterion_step_bound},
        {7, "cosine schedule exact at both endpoints", 0.0,
         criterion_schedule_exactness},
        {8, "desk-scale stochastic logistic trend over 10 seeds", 120.0,
         criterion_desk_scale_stochastic},
        {9, "deterministic projected run on the quartic benchmark", 30.0,
         criterion_hs50},
        {10, "finite-difference gradient suite", 5.0,
         criterion_finite_differences},
        {11, "byte-identical output for repeated invocations", 0.0,
         criterion_determinism},
    };

    // Criterion 6 inspects every run executed above it; execute bodies in an
    // order that fills the shared state first, then report in numeric order.
    const int order[] = {1, 2, 3, 4, 5, 8, 9, 10, 11, 6, 7};
    std::vector<Outcome> outcomes(checks.size() + 1);
    for (int id : order) {
        Check& check = checks[static_cast<std::size_t>(id - 1)];
        Outcome& res = outcomes[static_cast<std::size_t>(id)];
        const auto t0 = std::chrono::steady_clock::now();
        check.body(res);
        res.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        if (check.time_limit > 0.0 && res.seconds > check.time_limit) {
            res.pass = false;
            res.detail += (res.detail.empty() ? "" : "; ");
            res.detail += "runtime " + str(res.seconds) + "s exceeds " +
                          str(check.time_limit) + "s";
        }
    }

    int failures = 0;
    for (const Check& check : checks) {
        const Outcome& res = outcomes[static_cast<std::size_t>(check.id)];
        std::printf("%s criterion %2d: %s [%.2fs]%s%s\n",
                    res.pass ? "PASS" : "FAIL", check.id, check.name.c_str(),
                    res.seconds, res.detail.empty() ? "" : " -- ",
                    res.detail.c_str());
        if (!res.pass) ++failures;
    }
    std::printf("%d/%zu acceptance criteria passed\n",
                static_cast<int>(checks.size()) - failures, checks.size());
    return failures == 0 ? 0 : 1;
}
