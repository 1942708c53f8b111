#ifndef ACFS_ADAM_HPP
#define ACFS_ADAM_HPP

#include <cstdint>
#include <functional>

#include <Eigen/Core>

#include "acfs/cem.hpp"

namespace acfs {

// Objective over (point, mini-batch seed); the batch seed is fixed within an
// iteration so the finite-difference gradient differences a single batch.
using BatchObjective = std::function<double(const Eigen::VectorXd&, std::uint64_t)>;

struct AdamOptions {
    int n_iters = 80;
    double lr0 = 0.05;
    double lr_decay = 0.01; // lr_t = lr0 / (1 + lr_decay * t)
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double fd_step = 1e-4;
};

struct AdamResult {
    Eigen::VectorXd x;
    long long n_batch_evals = 0; // objective calls (each one batch)
};

/// Adam on finite-difference mini-batch gradients: every iteration draws a
/// fresh batch seed, differences the objective on that batch, applies the
/// bias-corrected Adam step, and projects back into the feasible set.
AdamResult adam_optimize(const BatchObjective& objective, const Eigen::VectorXd& x0,
                         const AdamOptions& opts, const BoxBounds& bounds, std::uint64_t seed,
                         const Projector& project = nullptr);

} // namespace acfs

#endif
