#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>

#include "psgleco/errors.hpp"

namespace psgleco {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

namespace detail {

// Relative pivot threshold for declaring AA^T rank deficient.
inline constexpr double kRankTol = 1e-12;

// Lower-triangular Cholesky of the symmetric positive definite matrix M.
// Throws RankDeficientError when a pivot falls at or below
// kRankTol * max(diag(M)), which signals that the originating constraint
// matrix is not numerically full row rank.
inline Matrix cholesky_with_pivot_check(const Matrix& M) {
    const Eigen::Index m = M.rows();
    const double max_diag = M.diagonal().maxCoeff();
    const double threshold = kRankTol * max_diag;
    Matrix L = Matrix::Zero(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        double pivot = M(j, j) - L.row(j).head(j).squaredNorm();
        if (!(pivot > threshold)) {
            throw RankDeficientError(j, pivot, threshold);
        }
        L(j, j) = std::sqrt(pivot);
        for (Eigen::Index i = j + 1; i < m; ++i) {
            L(i, j) = (M(i, j) - L.row(i).head(j).dot(L.row(j).head(j))) / L(j, j);
        }
    }
    return L;
}

} // namespace detail

// The affine feasible set S = {x : Ax = b} together with the cached
// factorization used by every projection. A must have full row rank and
// strictly fewer rows than columns. Immutable after construction and safe
// to share across concurrent runs.
struct ConstraintSystem {
    Matrix A;     // m x n
    Vector b;     // m
    Matrix AAt;   // A A^T, kept for the CG matvec
    Matrix chol;  // lower triangular L with L L^T = A A^T
    Eigen::Index m = 0;
    Eigen::Index n = 0;

    // Solves A A^T w = rhs with the cached factor.
    Vector solve_normal(const Vector& rhs) const {
        Vector w = chol.triangularView<Eigen::Lower>().solve(rhs);
        chol.transpose().triangularView<Eigen::Upper>().solveInPlace(w);
        return w;
    }
};

// Result of one projection. `residual` is the normal-equations residual
// r(y) = AA^T lambda - (Ay - b); for the inexact map it is the vector whose
// negative equals the infeasibility of the projected point.
struct ProjectionOutcome {
    Vector point;
    Vector residual;
    double residual_norm = 0.0;
    int inner_iterations = 0;
    bool skipped = false;
};

struct InfeasibilityMeasure {
    Vector vector_part;  // Ay - b
    double norm_part = 0.0;
};

inline ConstraintSystem build_constraint_system(Matrix A, Vector b) {
    if (A.rows() != b.size()) {
        throw DimensionError("constraint matrix has " + std::to_string(A.rows()) +
                             " rows but right-hand side has " +
                             std::to_string(b.size()) + " entries");
    }
    if (A.rows() >= A.cols()) {
        throw DimensionError("constraint matrix must have m < n, got " +
                             std::to_string(A.rows()) + " x " +
                             std::to_string(A.cols()));
    }
    if (!A.allFinite() || !b.allFinite()) {
        throw DimensionError("constraint data contains non-finite entries");
    }
    ConstraintSystem sys;
    sys.m = A.rows();
    sys.n = A.cols();
    sys.AAt = A * A.transpose();
    sys.chol = detail::cholesky_with_pivot_check(sys.AAt);
    sys.A = std::move(A);
    sys.b = std::move(b);
    return sys;
}

inline InfeasibilityMeasure infeasibility(const ConstraintSystem& sys, const Vector& y) {
    InfeasibilityMeasure out;
    out.vector_part = sys.A * y - sys.b;
    out.norm_part = out.vector_part.norm();
    return out;
}

// Orthogonal projection onto S: point = y - A^T lambda with
// AA^T lambda = Ay - b solved through the cached Cholesky factor.
inline ProjectionOutcome project_exact(const ConstraintSystem& sys, const Vector& y) {
    const Vector rhs = sys.A * y - sys.b;
    const Vector lambda = sys.solve_normal(rhs);
    ProjectionOutcome out;
    out.point = y - sys.A.transpose() * lambda;
    out.residual = sys.AAt * lambda - rhs;
    out.residual_norm = out.residual.norm();
    out.inner_iterations = 0;
    out.skipped = false;
    return out;
}

namespace detail {

inline constexpr double kSkipTol = 1e-12;       // skip projection below this infeasibility
inline constexpr double kCgRelFloor = 1e-10;    // lower clamp of the relative tolerance
inline constexpr double kCgRelCeil = 1e-3;      // upper clamp of the relative tolerance
inline constexpr double kCgCurvatureTol = 1e-14;

} // namespace detail

// Inexact projection. The caller supplies the absolute residual budget
// eta_k * e(x_k) + mu_k; the CG relative tolerance is
//   tau = max{1e-10, min{abs_bound / ||Ay-b||, 1e-3}},
// the iteration cap is m, and the projection is skipped entirely when
// ||Ay-b|| <= 1e-12. Where the 1e-10 floor would stop CG before the absolute
// budget is met, iteration continues toward the budget (still capped at m)
// so the achieved residual honors ||r(y)|| <= abs_bound whenever reachable.
inline ProjectionOutcome project_inexact(const ConstraintSystem& sys, const Vector& y,
                                         double abs_bound) {
    const Vector rhs = sys.A * y - sys.b;
    const double rhs_norm = rhs.norm();

    ProjectionOutcome out;
    if (rhs_norm <= detail::kSkipTol) {
        out.point = y;
        out.residual = -rhs;  // the lambda = 0 residual, so e(point) = -r(y) still holds
        out.residual_norm = rhs_norm;
        out.inner_iterations = 0;
        out.skipped = true;
        return out;
    }

    const double tau = std::max(detail::kCgRelFloor,
                                std::min(abs_bound / rhs_norm, detail::kCgRelCeil));
    const double threshold =
        std::min(tau * rhs_norm, std::max(abs_bound, 1e-14 * rhs_norm));

    const Eigen::Index m = sys.m;
    Vector lambda = Vector::Zero(m);  // CG starts from zero
    Vector res = rhs;                 // rhs - AAt * lambda
    Vector dir = res;
    Vector op_dir(m);
    double res_sq = res.squaredNorm();
    int iterations = 0;

    for (Eigen::Index it = 0; it < m && std::sqrt(res_sq) > threshold; ++it) {
        op_dir.noalias() = sys.AAt * dir;
        const double curvature = dir.dot(op_dir);
        if (curvature <= detail::kCgCurvatureTol * dir.squaredNorm()) {
            throw CgBreakdownError(static_cast<int>(it));
        }
        const double step = res_sq / curvature;
        lambda += step * dir;
        res -= step * op_dir;
        const double res_sq_next = res.squaredNorm();
        dir = res + (res_sq_next / res_sq) * dir;
        res_sq = res_sq_next;
        ++iterations;
    }

    out.point = y - sys.A.transpose() * lambda;
    out.residual = sys.AAt * lambda - rhs;  // recomputed, not the recursive CG residual
    out.residual_norm = out.residual.norm();
    out.inner_iterations = iterations;
    out.skipped = false;
    return out;
}

// P_A v = v - A^T (AA^T)^{-1} A v, the orthogonal projector onto null(A).
inline Vector apply_PA(const ConstraintSystem& sys, const Vector& v) {
    return v - sys.A.transpose() * sys.solve_normal(sys.A * v);
}

// D w = A^T (AA^T)^{-1} w.
inline Vector apply_D(const ConstraintSystem& sys, const Vector& w) {
    return sys.A.transpose() * sys.solve_normal(w);
}

} // namespace psgleco
