#ifndef ACFS_LBFGSB_HPP
#define ACFS_LBFGSB_HPP

#include <functional>

#include <Eigen/Core>

#include "acfs/cem.hpp"

namespace acfs {

using GradientFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
// Fired at the start and after every accepted step; stochastic objectives use
// it to rotate their scenario cache per iterate.
using IterateCallback = std::function<void(const Eigen::VectorXd&, int)>;

struct QuasiNewtonOptions {
    int max_iter = 80;
    int memory = 10;
    double step_tol = 1e-9;
    double pg_tol = 1e-6; // sup-norm of the projected gradient
    int max_line_search = 30;
    double armijo_c1 = 1e-4;
};

struct QuasiNewtonResult {
    Eigen::VectorXd x; // best iterate seen
    double f = 0.0;
    int iterations = 0;
    long long n_evals = 0;
    bool converged = false;
};

/// Limited-memory quasi-Newton with box handling by gradient projection:
/// coordinates pressed against an active bound are frozen out of the two-loop
/// direction, trial points are projected, and a backtracking Armijo search
/// acts along the projected path. Returns the best iterate by objective
/// value, so f(x*) <= f(x0) always holds on the callback's own values.
QuasiNewtonResult bounded_quasi_newton(const Objective& objective, const GradientFn& gradient,
                                       const Eigen::VectorXd& x0, const BoxBounds& bounds,
                                       const QuasiNewtonOptions& opts = {},
                                       const Projector& project = nullptr,
                                       const IterateCallback& on_iterate = nullptr);

} // namespace acfs

#endif
