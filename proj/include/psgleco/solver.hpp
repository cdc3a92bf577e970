#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "psgleco/errors.hpp"
#include "psgleco/objectives.hpp"
#include "psgleco/projection.hpp"
#include "psgleco/rng.hpp"
#include "psgleco/sampling.hpp"
#include "psgleco/steplength.hpp"

namespace psgleco {

enum class ProjectionMode { exact, inexact };
enum class X0Mode { projected_origin, zero, problem_given };

struct SolverConfig {
    std::int64_t k_max = 10000;
    ProjectionMode projection_mode = ProjectionMode::exact;
    double eta = 0.5;   // constant eta_k, must stay < 1
    double mu0 = 0.1;   // mu_k = mu0 * rho^k
    double rho = 0.95;
    std::int64_t metric_every = 1;  // cadence of the full-gradient diagnostic
    X0Mode x0_mode = X0Mode::projected_origin;
    Vector x0_given;                 // used when x0_mode == problem_given
    std::int64_t reshuffle_every = 0;  // 0 = partition fixed for the run
    bool log_f = true;
};

enum class RunStatus { ok, nonfinite_iterate, projection_failure, objective_failure };

struct RunRow {
    std::int64_t k = 0;
    double f = std::numeric_limits<double>::quiet_NaN();
    double d_norm = 0.0;
    double e = 0.0;
    double Delta = 0.0;
    double alpha = 0.0;
    double delta = 0.0;
    int cg_iters = 0;
};

// Per-run log plus the contract diagnostics tracked at every iteration.
struct RunRecord {
    std::vector<RunRow> rows;
    Vector x_final;
    std::uint64_t seed = 0;
    double wall_seconds = 0.0;
    RunStatus status = RunStatus::ok;
    std::int64_t abort_k = -1;
    std::string message;

    double min_d_norm = std::numeric_limits<double>::infinity();
    double min_e = std::numeric_limits<double>::infinity();
    // max over k of ||r(y_k)|| - (eta e(x_k) + mu_k); <= 0 means the residual
    // budget held everywhere (inexact mode only).
    double max_resb_excess = -std::numeric_limits<double>::infinity();
    // max relative error of the identity e~(x_{k+1}) = -r(y_k)
    double max_identity_error = 0.0;
    // max of (alpha_k delta_lo - Delta_k) and (Delta_k - alpha_k delta_hi)
    double max_step_bound_violation = -std::numeric_limits<double>::infinity();
    std::int64_t nonfinite_safeguards = 0;
};

// Aggregate over a seed set: per-iteration mean/min/max curves of the logged
// metrics plus per-run minima. Failed runs are excluded and reported.
struct AggregateRecord {
    std::vector<std::int64_t> ks;
    std::vector<double> d_mean, d_min, d_max;
    std::vector<double> e_mean, e_min, e_max;
    std::vector<double> f_mean;
    std::vector<RunRecord> runs;  // ordered by seed value
    std::vector<std::uint64_t> failed_seeds;
    double min_d_norm = std::numeric_limits<double>::infinity();
    double min_e = std::numeric_limits<double>::infinity();
};

// d(x) = pi_S(x - grad f(x)) - x, with the exact projection and the full
// gradient. A diagnostic, not part of the stochastic iteration.
inline std::pair<Vector, double> optimality_measure(const ConstraintSystem& sys,
                                                    const FiniteSumObjective& obj,
                                                    const Vector& x) {
    const Vector g = obj.full_gradient(x);
    const Vector d = project_exact(sys, x - g).point - x;
    return {d, d.norm()};
}

inline Vector initial_iterate(const ConstraintSystem& sys, const SolverConfig& cfg) {
    switch (cfg.x0_mode) {
        case X0Mode::projected_origin:
            return project_exact(sys, Vector::Zero(sys.n)).point;
        case X0Mode::zero:
            return Vector::Zero(sys.n);
        case X0Mode::problem_given:
            if (cfg.x0_given.size() != sys.n) {
                throw DimensionError("problem-given x0 has wrong dimension");
            }
            return cfg.x0_given;
    }
    return Vector::Zero(sys.n);
}

// One PSG_LECO run. Per iteration: draw a block uniformly, take
// y_k = x_k - Delta_k g_k, project (exact, or inexact under the residual
// budget eta e(x_k) + mu_k), then update the step length from information
// available at x_{k+1}, before the next draw.
inline RunRecord run(const ConstraintSystem& sys, const FiniteSumObjective& obj,
                     Partition partition, const StepConfig& step_cfg,
                     const SolverConfig& cfg, RngStream& rng) {
    const auto t_start = std::chrono::steady_clock::now();

    if (cfg.metric_every < 1) {
        throw ConfigError("metric_every must be a positive integer");
    }
    if (!(cfg.eta >= 0.0 && cfg.eta < 1.0)) {
        throw ConfigError("eta must lie in [0, 1)");
    }

    RunRecord rec;
    rec.seed = rng.seed();
    rec.rows.reserve(static_cast<std::size_t>(cfg.k_max / cfg.metric_every + 1));

    const Eigen::Index batch_size =
        partition.blocks.empty() ? 0
                                 : static_cast<Eigen::Index>(partition.blocks[0].size());

    Vector x = initial_iterate(sys, cfg);
    StepState st = initial_step_state(step_cfg);
    InfeasibilityMeasure infeas = infeasibility(sys, x);

    Vector x_prev, g_prev;
    double mu = cfg.mu0;
    std::int64_t k = 0;

    try {
        for (; k < cfg.k_max; ++k) {
            if (cfg.reshuffle_every > 0 && k > 0 && k % cfg.reshuffle_every == 0) {
                partition = build_partition(partition.total, batch_size, rng);
            }

            const double alpha_k = alpha_schedule(step_cfg, k == 0 ? 0 : k - 1);
            rec.max_step_bound_violation =
                std::max({rec.max_step_bound_violation,
                          alpha_k * step_cfg.delta_lo - st.Delta,
                          st.Delta - alpha_k * step_cfg.delta_hi});

            const bool log_row = k % cfg.metric_every == 0;
            RunRow row;
            if (log_row) {
                row.k = k;
                row.f = cfg.log_f ? obj.value(x) : std::numeric_limits<double>::quiet_NaN();
                row.d_norm = optimality_measure(sys, obj, x).second;
                row.e = infeas.norm_part;
                row.Delta = st.Delta;
                row.alpha = alpha_k;
                if (cfg.log_f && !std::isfinite(row.f)) {
                    rec.status = RunStatus::nonfinite_iterate;
                    rec.abort_k = k;
                    rec.message = "non-finite objective value at iteration " +
                                  std::to_string(k);
                    break;
                }
                rec.min_d_norm = std::min(rec.min_d_norm, row.d_norm);
                rec.min_e = std::min(rec.min_e, row.e);
            }

            const Eigen::Index block = sample_block(partition, rng);
            const Vector g = stochastic_gradient(obj, x, partition, block);
            const Vector y = x - st.Delta * g;

            ProjectionOutcome proj;
            if (cfg.projection_mode == ProjectionMode::exact) {
                proj = project_exact(sys, y);
            } else {
                const double bound = cfg.eta * infeas.norm_part + mu;
                proj = project_inexact(sys, y, bound);
                rec.max_resb_excess =
                    std::max(rec.max_resb_excess, proj.residual_norm - bound);
            }

            if (!proj.point.allFinite()) {
                rec.status = RunStatus::nonfinite_iterate;
                rec.abort_k = k;
                rec.message = "non-finite iterate at iteration " + std::to_string(k);
                if (log_row) rec.rows.push_back(row);
                break;
            }

            // e~(x_{k+1}) = -r(y_k); reuse the fresh infeasibility for the
            // next iteration's projection budget.
            InfeasibilityMeasure next_infeas = infeasibility(sys, proj.point);
            const double identity_error =
                (next_infeas.vector_part + proj.residual).norm() /
                (1.0 + proj.residual_norm);
            rec.max_identity_error = std::max(rec.max_identity_error, identity_error);

            if (k == 0) {
                next_step(step_cfg, st, x, x, g, g);  // no BB data yet; delta unchanged
            } else {
                next_step(step_cfg, st, x, x_prev, g, g_prev);
            }

            if (log_row) {
                row.delta = st.delta;
                row.cg_iters = proj.inner_iterations;
                rec.rows.push_back(row);
            }

            x_prev = std::move(x);
            g_prev = g;
            x = std::move(proj.point);
            infeas = std::move(next_infeas);
            mu *= cfg.rho;
        }
    } catch (const CgBreakdownError& err) {
        rec.status = RunStatus::projection_failure;
        rec.abort_k = k;
        rec.message = err.what();
    } catch (const ObjectiveError& err) {
        rec.status = RunStatus::objective_failure;
        rec.abort_k = k;
        rec.message = err.what();
    }

    rec.x_final = std::move(x);
    rec.nonfinite_safeguards = st.nonfinite_safeguards;
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
    return rec;
}

namespace detail {

inline AggregateRecord aggregate_runs(std::vector<RunRecord> runs,
                                      std::vector<std::uint64_t> failed) {
    // Sorting by seed makes aggregation independent of completion order.
    std::sort(runs.begin(), runs.end(),
              [](const RunRecord& a, const RunRecord& b) { return a.seed < b.seed; });
    std::sort(failed.begin(), failed.end());

    AggregateRecord agg;
    agg.failed_seeds = std::move(failed);
    agg.runs = std::move(runs);
    if (agg.runs.empty()) return agg;

    std::size_t grid = agg.runs[0].rows.size();
    for (const RunRecord& r : agg.runs) grid = std::min(grid, r.rows.size());

    agg.ks.resize(grid);
    agg.d_mean.assign(grid, 0.0);
    agg.d_min.assign(grid, std::numeric_limits<double>::infinity());
    agg.d_max.assign(grid, -std::numeric_limits<double>::infinity());
    agg.e_mean.assign(grid, 0.0);
    agg.e_min.assign(grid, std::numeric_limits<double>::infinity());
    agg.e_max.assign(grid, -std::numeric_limits<double>::infinity());
    agg.f_mean.assign(grid, 0.0);

    const double inv = 1.0 / static_cast<double>(agg.runs.size());
    for (std::size_t i = 0; i < grid; ++i) {
        agg.ks[i] = agg.runs[0].rows[i].k;
        for (const RunRecord& r : agg.runs) {
            const RunRow& row = r.rows[i];
            agg.d_mean[i] += row.d_norm;
            agg.d_min[i] = std::min(agg.d_min[i], row.d_norm);
            agg.d_max[i] = std::max(agg.d_max[i], row.d_norm);
            agg.e_mean[i] += row.e;
            agg.e_min[i] = std::min(agg.e_min[i], row.e);
            agg.e_max[i] = std::max(agg.e_max[i], row.e);
            agg.f_mean[i] += row.f;
        }
        agg.d_mean[i] *= inv;
        agg.e_mean[i] *= inv;
        agg.f_mean[i] *= inv;
    }
    for (const RunRecord& r : agg.runs) {
        agg.min_d_norm = std::min(agg.min_d_norm, r.min_d_norm);
        agg.min_e = std::min(agg.min_e, r.min_e);
    }
    return agg;
}

} // namespace detail

// One run per seed, each with an independently built partition; runs may
// execute concurrently (they share only immutable state). The aggregate is
// bit-identical under any permutation of the seed list.
inline AggregateRecord run_many(const ConstraintSystem& sys,
                                const FiniteSumObjective& obj,
                                Eigen::Index batch_size, const StepConfig& step_cfg,
                                const SolverConfig& cfg,
                                const std::vector<std::uint64_t>& seeds,
                                unsigned jobs = 1) {
    if (seeds.empty()) {
        throw ConfigError("run_many requires at least one seed");
    }
    std::vector<RunRecord> records(seeds.size());

    auto execute = [&](std::size_t idx) {
        RngStream rng(seeds[idx]);
        Partition partition = build_partition(obj.components(), batch_size, rng);
        records[idx] = run(sys, obj, std::move(partition), step_cfg, cfg, rng);
    };

    if (jobs <= 1 || seeds.size() == 1) {
        for (std::size_t i = 0; i < seeds.size(); ++i) execute(i);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        const unsigned workers =
            std::min<unsigned>(jobs, static_cast<unsigned>(seeds.size()));
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < seeds.size();
                     i = next.fetch_add(1)) {
                    execute(i);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    std::vector<RunRecord> completed;
    std::vector<std::uint64_t> failed;
    for (auto& rec : records) {
        if (rec.status == RunStatus::ok) {
            completed.push_back(std::move(rec));
        } else {
            failed.push_back(rec.seed);
        }
    }
    return detail::aggregate_runs(std::move(completed), std::move(failed));
}

} // namespace psgleco
