#pragma once

// Shared helpers for the test suites: random problem generators and the
// finite-difference gradient oracle. Everything here is test-only and
// independent of the gradient implementations it checks.

#include <cstdint>
#include <functional>
#include <memory>
#include <utility>

#include "psgleco/psgleco.hpp"

namespace testsupport {

using psgleco::Matrix;
using psgleco::RngStream;
using psgleco::SparseRowMatrix;
using psgleco::Vector;

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, RngStream& rng) {
    Matrix M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = rng.normal();
    return M;
}

inline Vector random_vector(Eigen::Index size, RngStream& rng) {
    Vector v(size);
    for (Eigen::Index i = 0; i < size; ++i) v(i) = rng.normal();
    return v;
}

// Central finite differences at step h = 1e-6 (1 + ||x||): the independent
// oracle for every analytic gradient in the library.
inline Vector fd_gradient(const std::function<double(const Vector&)>& f,
                          const Vector& x) {
    const double h = 1e-6 * (1.0 + x.norm());
    Vector g(x.size());
    Vector probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        probe(i) = x(i) + h;
        const double fp = f(probe);
        probe(i) = x(i) - h;
        const double fm = f(probe);
        probe(i) = x(i);
        g(i) = (fp - fm) / (2.0 * h);
    }
    return g;
}

// Linearly separable logistic data: labels are the sign of z^T w under a
// hidden direction w, normal features.
inline std::shared_ptr<psgleco::LogisticProblem>
make_synthetic_logistic(Eigen::Index samples, Eigen::Index dim, std::uint64_t seed) {
    RngStream rng(seed);
    const Vector w = random_vector(dim, rng);
    Matrix Z = random_matrix(samples, dim, rng);
    Vector labels(samples);
    for (Eigen::Index i = 0; i < samples; ++i) {
        labels(i) = Z.row(i).dot(w) >= 0.0 ? 1.0 : -1.0;
    }
    return std::make_shared<psgleco::LogisticProblem>(Z.sparseView(), labels);
}

// Random full-row-rank constraint pair with normal entries.
inline std::pair<Matrix, Vector> random_constraint_pair(Eigen::Index m,
                                                        Eigen::Index n,
                                                        RngStream& rng) {
    return {random_matrix(m, n, rng), random_vector(m, rng)};
}

} // namespace testsupport
