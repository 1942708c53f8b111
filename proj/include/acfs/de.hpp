#ifndef ACFS_DE_HPP
#define ACFS_DE_HPP

#include <cstdint>

#include <Eigen/Core>

#include "acfs/cem.hpp"

namespace acfs {

struct Population {
    Eigen::MatrixXd members; // row per member
    Eigen::VectorXd scores;

    int size() const { return static_cast<int>(members.rows()); }
};

struct DeOptions {
    int n_iters = 55;
    double f = 0.7;  // differential weight
    double cr = 0.9; // crossover rate
};

/// DE/current-to-best/1/bin: v = x_i + F (x_best - x_i) + F (x_r1 - x_r2),
/// binomial crossover with one guaranteed mutant coordinate, projection,
/// then greedy selection (incumbent kept on ties). Initial scores are
/// computed here when the input population carries none.
Population de_optimize(const Objective& objective, Population init, const BoxBounds& bounds,
                       const DeOptions& opts, std::uint64_t seed,
                       const Projector& project = nullptr);

} // namespace acfs

#endif
