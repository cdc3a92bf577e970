#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "psgleco/projection.hpp"

namespace psgleco {

enum class Strategy { S1, S2, S3 };

// Step-length hyper-parameters. S1 keeps alpha constant and refreshes delta
// with the retarded Barzilai-Borwein scalar; S2 combines the BB scalar with
// the diminishing factor a/(a+k) times a cosine decay from gamma0 to gamma1;
// S3 uses the diminishing factor with delta fixed to 1. Setting a = +inf
// turns the hyperbolic factor into 1.
struct StepConfig {
    double delta_lo = 1e-3;
    double delta_hi = 1e2;
    Strategy strategy = Strategy::S2;
    double alpha_const = 0.1;  // S1
    double a = 1000.0;         // S2, S3
    double gamma0 = 0.1;       // S2, S3
    double gamma1 = 1e-5;      // S2, S3
    std::int64_t k_max = 10000;
    std::int64_t bb_update_every = 20;
};

// State advanced once per iteration: Delta is the step currently in use,
// delta the latest (unclamped) BB scalar.
struct StepState {
    double Delta = 0.0;
    double delta = 0.0;
    std::int64_t k = 0;
    std::int64_t nonfinite_safeguards = 0;
};

// pi_delta: clamp to [delta_lo, delta_hi]; non-finite input falls back to
// delta_lo.
inline double clamp_delta(const StepConfig& cfg, double delta) {
    if (!std::isfinite(delta)) return cfg.delta_lo;
    return std::max(cfg.delta_lo, std::min(delta, cfg.delta_hi));
}

// Retarded BB scalar |d^T d / d^T z|; returns `fallback` when the denominator
// is negligible or the quotient is non-finite.
inline double bb_delta(const Vector& d, const Vector& z, double fallback) {
    const double numerator = d.squaredNorm();
    const double denominator = d.dot(z);
    if (std::abs(denominator) <= 1e-14 * d.norm() * z.norm()) return fallback;
    const double ratio = std::abs(numerator / denominator);
    if (!std::isfinite(ratio)) return fallback;
    return ratio;
}

// c_k(gamma0, gamma1) = gamma1 + 0.5 (gamma0 - gamma1)(1 + cos(k pi / k_max)).
// Exact at both endpoints: c_0 = gamma0, c_{k_max} = gamma1.
inline double cosine_decay(const StepConfig& cfg, std::int64_t k) {
    const double ratio = static_cast<double>(k) / static_cast<double>(cfg.k_max);
    return cfg.gamma1 +
           0.5 * (cfg.gamma0 - cfg.gamma1) * (1.0 + std::cos(M_PI * ratio));
}

// alpha_{k+1}: the constant alpha for S1, a/(a+k) * c_k(gamma0, gamma1) for
// S2/S3. alpha_0 is defined as the k = 0 value.
inline double alpha_schedule(const StepConfig& cfg, std::int64_t k) {
    if (cfg.strategy == Strategy::S1) return cfg.alpha_const;
    const double factor = 1.0 / (1.0 + static_cast<double>(k) / cfg.a);
    return factor * cosine_decay(cfg, k);
}

// Initial state: Delta_0 = alpha_0 * delta_lo.
inline StepState initial_step_state(const StepConfig& cfg) {
    StepState st;
    st.delta = cfg.delta_lo;
    st.Delta = alpha_schedule(cfg, 0) * cfg.delta_lo;
    st.k = 0;
    return st;
}

// Advances the state at the end of iteration k (after x_{k+1} exists, before
// the next mini-batch draw): refreshes delta_k per the strategy, then forms
// Delta_{k+1} = alpha_{k+1} * pi_delta(delta_k). For S1/S2 the BB refresh
// runs when k is a positive multiple of bb_update_every, using the most
// recent step d_{k-1} = x_k - x_{k-1} and gradient difference
// z_{k-1} = g_k - g_{k-1} supplied by the caller.
inline void next_step(const StepConfig& cfg, StepState& st, const Vector& x_new,
                      const Vector& x_old, const Vector& g_new, const Vector& g_old) {
    if (cfg.strategy == Strategy::S3) {
        st.delta = 1.0;
    } else if (st.k >= 1 && st.k % cfg.bb_update_every == 0) {
        st.delta = bb_delta(x_new - x_old, g_new - g_old, st.delta);
    }
    if (!std::isfinite(st.delta)) {
        st.delta = cfg.delta_lo;
        ++st.nonfinite_safeguards;
    }
    st.Delta = alpha_schedule(cfg, st.k) * clamp_delta(cfg, st.delta);
    ++st.k;
}

} // namespace psgleco
