#pragma once

#include <cmath>
#include <cstdint>

#include "psgleco/errors.hpp"
#include "psgleco/projection.hpp"
#include "psgleco/rng.hpp"

namespace psgleco {

struct GeneratedConstraints {
    Matrix A;
    Vector b;
};

// Random linear equality constraints with m = floor(fraction * n) rows and
// i.i.d. standard normal entries. Full row rank is verified by attempting the
// Cholesky build; the (probability ~0) rank-deficient draw is retried with
// the advanced stream, at most five times.
inline GeneratedConstraints random_constraints(Eigen::Index n, double fraction,
                                               RngStream& rng) {
    if (n < 2) {
        throw GenerationError("constraint generation requires n >= 2");
    }
    const auto m = static_cast<Eigen::Index>(std::floor(fraction * static_cast<double>(n)));
    if (m < 1 || m >= n) {
        throw GenerationError("fraction " + std::to_string(fraction) +
                              " gives invalid constraint count m = " +
                              std::to_string(m) + " for n = " + std::to_string(n));
    }
    for (int attempt = 0; attempt < 5; ++attempt) {
        GeneratedConstraints out;
        out.A = Matrix(m, n);
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index j = 0; j < n; ++j) out.A(i, j) = rng.normal();
        out.b = Vector(m);
        for (Eigen::Index i = 0; i < m; ++i) out.b(i) = rng.normal();
        try {
            build_constraint_system(out.A, out.b);
        } catch (const RankDeficientError&) {
            continue;
        }
        return out;
    }
    throw GenerationError("failed to draw a full-row-rank constraint matrix "
                          "after 5 attempts");
}

} // namespace psgleco
