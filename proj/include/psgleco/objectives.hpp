#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "psgleco/errors.hpp"
#include "psgleco/projection.hpp"
#include "psgleco/rng.hpp"

namespace psgleco {

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Finite-sum objective f(x) = (1/N) sum_j f_j(x). component_gradient returns
// the gradient of one f_j (not divided by N); full_gradient is their mean.
class FiniteSumObjective {
public:
    virtual ~FiniteSumObjective() = default;

    virtual Eigen::Index components() const = 0;  // N
    virtual Eigen::Index dimension() const = 0;   // n
    virtual double value(const Vector& x) const = 0;
    virtual Vector component_gradient(Eigen::Index j, const Vector& x) const = 0;

    virtual Vector full_gradient(const Vector& x) const {
        Vector g = Vector::Zero(dimension());
        for (Eigen::Index j = 0; j < components(); ++j) {
            g += component_gradient(j, x);
        }
        return g / static_cast<double>(components());
    }
};

namespace detail {

// log(1 + exp(t)) without overflow for |t| up to 1e4 and beyond.
inline double log1p_exp(double t) {
    if (t <= 0.0) return std::log1p(std::exp(t));
    return t + std::log1p(std::exp(-t));
}

// Logistic sigmoid 1 / (1 + exp(-u)), evaluated on the stable branch.
inline double sigmoid(double u) {
    if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
    const double e = std::exp(u);
    return e / (1.0 + e);
}

} // namespace detail

// Binary logistic regression, f_j(x) = log(1 + exp(-y_j z_j^T x)),
// labels in {-1, +1}, features stored sparse row-major.
class LogisticProblem : public FiniteSumObjective {
public:
    LogisticProblem(SparseRowMatrix features, Vector labels)
        : Z_(std::move(features)), y_(std::move(labels)) {
        if (Z_.rows() != y_.size()) {
            throw DimensionError("feature rows and label count differ");
        }
        for (Eigen::Index i = 0; i < y_.size(); ++i) {
            if (y_(i) != 1.0 && y_(i) != -1.0) {
                throw ObjectiveError("logistic label at row " + std::to_string(i) +
                                     " is not in {-1,+1}");
            }
        }
    }

    Eigen::Index components() const override { return Z_.rows(); }
    Eigen::Index dimension() const override { return Z_.cols(); }

    double value(const Vector& x) const override {
        const Vector margins = Z_ * x;
        double total = 0.0;
        for (Eigen::Index i = 0; i < y_.size(); ++i) {
            total += detail::log1p_exp(-y_(i) * margins(i));
        }
        return total / static_cast<double>(y_.size());
    }

    // grad f_j(x) = -y_j z_j * sigmoid(-y_j z_j^T x)
    Vector component_gradient(Eigen::Index j, const Vector& x) const override {
        double margin = 0.0;
        for (SparseRowMatrix::InnerIterator it(Z_, j); it; ++it) {
            margin += it.value() * x(it.col());
        }
        const double weight = -y_(j) * detail::sigmoid(-y_(j) * margin);
        Vector g = Vector::Zero(dimension());
        for (SparseRowMatrix::InnerIterator it(Z_, j); it; ++it) {
            g(it.col()) = weight * it.value();
        }
        return g;
    }

    Vector full_gradient(const Vector& x) const override {
        const Vector margins = Z_ * x;
        Vector g = Vector::Zero(dimension());
        const double inv_n = 1.0 / static_cast<double>(y_.size());
        for (Eigen::Index i = 0; i < y_.size(); ++i) {
            const double weight = -y_(i) * detail::sigmoid(-y_(i) * margins(i)) * inv_n;
            for (SparseRowMatrix::InnerIterator it(Z_, i); it; ++it) {
                g(it.col()) += weight * it.value();
            }
        }
        return g;
    }

    const SparseRowMatrix& features() const { return Z_; }
    const Vector& labels() const { return y_; }

private:
    SparseRowMatrix Z_;
    Vector y_;
};

// A smooth base function with analytic gradient, used by the perturbed
// finite-sum construction and the deterministic test problems.
struct SmoothFunction {
    Eigen::Index n = 0;
    std::function<double(const Vector&)> value;
    std::function<Vector(const Vector&)> gradient;
};

// Perturbed replica objective built from a smooth base:
//   f(x) = base(x) + (sum_i xi_i^2) ||x||^2,
// realized as components f_j(x) = base(x) + N xi_j^2 ||x||^2 whose mean
// reproduces f exactly. The xi_i are drawn once with a fixed seed.
class PerturbedProblem : public FiniteSumObjective {
public:
    PerturbedProblem(SmoothFunction base, Eigen::Index components, double sigma,
                     std::uint64_t xi_seed)
        : base_(std::move(base)), sigma_(sigma) {
        RngStream rng(xi_seed);
        xi_sq_.resize(components);
        for (Eigen::Index i = 0; i < components; ++i) {
            const double xi = sigma * rng.normal();
            xi_sq_(i) = xi * xi;
        }
        xi_sq_sum_ = xi_sq_.sum();
    }

    PerturbedProblem(SmoothFunction base, Vector xi_sq)
        : base_(std::move(base)), xi_sq_(std::move(xi_sq)), sigma_(0.0) {
        xi_sq_sum_ = xi_sq_.sum();
    }

    Eigen::Index components() const override { return xi_sq_.size(); }
    Eigen::Index dimension() const override { return base_.n; }

    double value(const Vector& x) const override {
        return base_.value(x) + xi_sq_sum_ * x.squaredNorm();
    }

    Vector component_gradient(Eigen::Index j, const Vector& x) const override {
        const double scale = 2.0 * static_cast<double>(components()) * xi_sq_(j);
        return base_.gradient(x) + scale * x;
    }

    Vector full_gradient(const Vector& x) const override {
        return base_.gradient(x) + (2.0 * xi_sq_sum_) * x;
    }

    const Vector& xi_squared() const { return xi_sq_; }
    double sigma() const { return sigma_; }

private:
    SmoothFunction base_;
    Vector xi_sq_;
    double sigma_;
    double xi_sq_sum_ = 0.0;
};

// Convex quadratic (1/2) x^T H x + c^T x split into N components
// (1/2) x^T H_j x + c_j^T x whose means reproduce (H, c) exactly.
class QuadraticOracleProblem : public FiniteSumObjective {
public:
    QuadraticOracleProblem(Matrix H, Vector c, std::vector<Matrix> H_parts,
                           std::vector<Vector> c_parts)
        : H_(std::move(H)), c_(std::move(c)),
          H_parts_(std::move(H_parts)), c_parts_(std::move(c_parts)) {}

    Eigen::Index components() const override {
        return static_cast<Eigen::Index>(H_parts_.size());
    }
    Eigen::Index dimension() const override { return H_.rows(); }

    double value(const Vector& x) const override {
        return 0.5 * x.dot(H_ * x) + c_.dot(x);
    }

    Vector component_gradient(Eigen::Index j, const Vector& x) const override {
        return H_parts_[static_cast<std::size_t>(j)] * x +
               c_parts_[static_cast<std::size_t>(j)];
    }

    Vector full_gradient(const Vector& x) const override { return H_ * x + c_; }

    const Matrix& hessian() const { return H_; }
    const Vector& linear_term() const { return c_; }

    // Gradient Lipschitz constant L = lambda_max(H).
    double lipschitz_constant() const {
        Eigen::SelfAdjointEigenSolver<Matrix> eigs(H_, Eigen::EigenvaluesOnly);
        return eigs.eigenvalues().maxCoeff();
    }

private:
    Matrix H_;
    Vector c_;
    std::vector<Matrix> H_parts_;
    std::vector<Vector> c_parts_;
};

inline double logistic_value(const LogisticProblem& p, const Vector& x) {
    return p.value(x);
}

inline Vector logistic_component_gradient(const LogisticProblem& p, Eigen::Index j,
                                          const Vector& x) {
    return p.component_gradient(j, x);
}

inline Vector perturbed_component_gradient(const PerturbedProblem& p, Eigen::Index j,
                                           const Vector& x) {
    return p.component_gradient(j, x);
}

// Hock-Schittkowski problem 50: convex quartic objective with three linear
// equality constraints and the standard infeasible-looking but feasible start.
struct Hs50 {
    SmoothFunction objective;
    Matrix A;   // 3 x 5
    Vector b;   // (6, 6, 6)
    Vector x0;  // (35, -31, 11, 5, -5)
};

inline Hs50 hs50_base() {
    Hs50 out;
    out.objective.n = 5;
    out.objective.value = [](const Vector& x) {
        const double d1 = x(0) - x(1);
        const double d2 = x(1) - x(2);
        const double d3 = x(2) - x(3);
        const double d4 = x(3) - x(4);
        return d1 * d1 + d2 * d2 + d3 * d3 * d3 * d3 + d4 * d4;
    };
    out.objective.gradient = [](const Vector& x) {
        const double d1 = x(0) - x(1);
        const double d2 = x(1) - x(2);
        const double d3 = x(2) - x(3);
        const double d4 = x(3) - x(4);
        Vector g(5);
        g(0) = 2.0 * d1;
        g(1) = -2.0 * d1 + 2.0 * d2;
        g(2) = -2.0 * d2 + 4.0 * d3 * d3 * d3;
        g(3) = -4.0 * d3 * d3 * d3 + 2.0 * d4;
        g(4) = -2.0 * d4;
        return g;
    };
    out.A = Matrix::Zero(3, 5);
    out.A << 1, 2, 3, 0, 0,
             0, 1, 2, 3, 0,
             0, 0, 1, 2, 3;
    out.b = Vector::Constant(3, 6.0);
    out.x0 = Vector(5);
    out.x0 << 35, -31, 11, 5, -5;
    return out;
}

struct QuadraticOracle {
    std::shared_ptr<QuadraticOracleProblem> problem;
    ConstraintSystem system;
    Vector x_star;  // solution of the KKT system [H A^T; A 0](x, lambda) = (-c, b)
};

// Random equality-constrained convex quadratic with its exact minimizer
// obtained by a direct dense KKT solve. H = M^T M / n + I is SPD; A is
// full row rank with probability one.
inline QuadraticOracle quadratic_oracle(Eigen::Index n, Eigen::Index m,
                                        Eigen::Index components, std::uint64_t seed) {
    if (m >= n) {
        throw DimensionError("quadratic oracle requires m < n");
    }
    RngStream rng(seed);
    auto draw_matrix = [&rng](Eigen::Index rows, Eigen::Index cols) {
        Matrix M(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = rng.normal();
        return M;
    };
    auto draw_vector = [&rng](Eigen::Index size) {
        Vector v(size);
        for (Eigen::Index i = 0; i < size; ++i) v(i) = rng.normal();
        return v;
    };

    const Matrix M = draw_matrix(n, n);
    Matrix H = M.transpose() * M / static_cast<double>(n) +
               Matrix::Identity(n, n);
    Vector c = draw_vector(n);
    const Matrix A = draw_matrix(m, n);
    const Vector b = draw_vector(m);

    // Component split: zero-sum symmetric perturbations around (H, c).
    std::vector<Matrix> H_parts;
    std::vector<Vector> c_parts;
    H_parts.reserve(static_cast<std::size_t>(components));
    c_parts.reserve(static_cast<std::size_t>(components));
    Matrix H_balance = Matrix::Zero(n, n);
    Vector c_balance = Vector::Zero(n);
    for (Eigen::Index j = 0; j + 1 < components; ++j) {
        Matrix P = 0.1 * draw_matrix(n, n);
        P = 0.5 * (P + P.transpose()).eval();
        Vector q = 0.1 * draw_vector(n);
        H_balance -= P;
        c_balance -= q;
        H_parts.push_back(H + P);
        c_parts.push_back(c + q);
    }
    H_parts.push_back(H + H_balance);
    c_parts.push_back(c + c_balance);

    Matrix kkt = Matrix::Zero(n + m, n + m);
    kkt.topLeftCorner(n, n) = H;
    kkt.topRightCorner(n, m) = A.transpose();
    kkt.bottomLeftCorner(m, n) = A;
    Vector rhs(n + m);
    rhs.head(n) = -c;
    rhs.tail(m) = b;
    const Vector solution = kkt.partialPivLu().solve(rhs);

    QuadraticOracle out;
    out.problem = std::make_shared<QuadraticOracleProblem>(
        std::move(H), std::move(c), std::move(H_parts), std::move(c_parts));
    out.system = build_constraint_system(A, b);
    out.x_star = solution.head(n);
    return out;
}

} // namespace psgleco
