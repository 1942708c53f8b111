#ifndef ACFS_FD_GRADIENT_HPP
#define ACFS_FD_GRADIENT_HPP

#include "acfs/cem.hpp"
#include "acfs/dgp.hpp"
#include "acfs/forest.hpp"

namespace acfs {

/// Central-difference gradient of the spectral risk evaluated on one fixed
/// scenario matrix (common random numbers): both sides of every difference
/// price the same draws, so repeated calls are bit-identical. Perturbed
/// points are passed through feasible_project; a coordinate whose effective
/// step collapses to zero falls back to a one-sided difference.
Vec6 fd_gradient_crn(const CostFn& cost_fn, const RiskParams& params, const Decision& x,
                     const ScenarioMatrix& cached, double step);

// Plain numeric central-difference gradient of a generic objective, with
// optional projection of the probe points.
Eigen::VectorXd numeric_gradient(const Objective& f, const Eigen::VectorXd& x, double step,
                                 const Projector& project = nullptr);

} // namespace acfs

#endif
