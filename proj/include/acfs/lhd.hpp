#ifndef ACFS_LHD_HPP
#define ACFS_LHD_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "acfs/decision.hpp"

namespace acfs {

// Latin hypercube design on the unit box: one point per stratum and
// dimension, uniform within the stratum; best of n_restarts designs by the
// maximin (minimum pairwise distance) criterion.
Eigen::MatrixXd maximin_lhd_unit(int n, int dim, std::uint64_t seed, int n_restarts);

// Design mapped into the box [lo, hi].
Eigen::MatrixXd maximin_lhd(int n, const BoxBounds& bounds, std::uint64_t seed, int n_restarts);

// Decision-space design: box-mapped points passed through feasible_project.
std::vector<Decision> maximin_lhd_decisions(int n, std::uint64_t seed, int n_restarts);

double min_pairwise_distance(const Eigen::MatrixXd& points);

} // namespace acfs

#endif
