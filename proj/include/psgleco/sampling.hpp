#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "psgleco/errors.hpp"
#include "psgleco/objectives.hpp"
#include "psgleco/rng.hpp"

namespace psgleco {

// Disjoint index blocks covering {0, ..., N-1}, fixed for a whole run unless
// the caller asks for per-iteration reshuffles. Immutable once built.
struct Partition {
    std::vector<std::vector<Eigen::Index>> blocks;
    Eigen::Index total = 0;  // N
    std::uint64_t seed = 0;

    Eigen::Index block_count() const {
        return static_cast<Eigen::Index>(blocks.size());  // r
    }
};

// Cuts a uniformly random permutation of {0,...,N-1} into r = ceil(N/batch)
// consecutive chunks; the last chunk holds the remainder.
inline Partition build_partition(Eigen::Index total, Eigen::Index batch_size,
                                 RngStream& rng) {
    if (batch_size < 1 || batch_size > total) {
        throw InvalidBatchSizeError(batch_size, total);
    }
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(total));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    for (Eigen::Index i = total - 1; i > 0; --i) {
        const auto j = static_cast<Eigen::Index>(
            rng.uniform_index(static_cast<std::uint64_t>(i) + 1));
        std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }

    const Eigen::Index block_count = (total + batch_size - 1) / batch_size;
    Partition p;
    p.total = total;
    p.seed = rng.seed();
    p.blocks.resize(static_cast<std::size_t>(block_count));
    Eigen::Index offset = 0;
    for (Eigen::Index i = 0; i < block_count; ++i) {
        const Eigen::Index size = std::min(batch_size, total - offset);
        p.blocks[static_cast<std::size_t>(i)].assign(
            perm.begin() + offset, perm.begin() + offset + size);
        offset += size;
    }
    return p;
}

// Draws a block index uniformly from {0, ..., r-1}.
inline Eigen::Index sample_block(const Partition& p, RngStream& rng) {
    return static_cast<Eigen::Index>(
        rng.uniform_index(static_cast<std::uint64_t>(p.block_count())));
}

// Scaled mini-batch gradient g^(i) = (r/N) sum_{j in block i} grad f_j(x).
// An unbiased estimator of the full gradient under the uniform block draw.
inline Vector stochastic_gradient(const FiniteSumObjective& obj, const Vector& x,
                                  const Partition& p, Eigen::Index block) {
    Vector g = Vector::Zero(obj.dimension());
    for (const Eigen::Index j : p.blocks[static_cast<std::size_t>(block)]) {
        g += obj.component_gradient(j, x);
    }
    g *= static_cast<double>(p.block_count()) / static_cast<double>(p.total);
    if (!g.allFinite()) {
        throw ObjectiveError("non-finite component gradient in block " +
                             std::to_string(block));
    }
    return g;
}

} // namespace psgleco
