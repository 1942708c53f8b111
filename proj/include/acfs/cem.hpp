#ifndef ACFS_CEM_HPP
#define ACFS_CEM_HPP

#include <cstdint>
#include <functional>

#include <Eigen/Core>

#include "acfs/decision.hpp"

namespace acfs {

using Objective = std::function<double(const Eigen::VectorXd&)>;
using Projector = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct CemOptions {
    int n_iters = 7;
    int pop_size = 35;
    double elite_frac = 0.15;
    double smoothing = 0.60;
    Eigen::VectorXd init_mean; // empty: box centre
    Eigen::VectorXd init_sd;   // empty: 0.25 * (hi - lo)
    int max_resample_retries = 200;
};

struct CemResult {
    Eigen::VectorXd mean;
    Eigen::MatrixXd population; // final population, row per member
    Eigen::VectorXd scores;
    Eigen::VectorXd best_x; // best candidate seen across all iterations
    double best_f = 0.0;
    long long n_evals = 0;
};

int cem_elite_count(int pop_size, double elite_frac); // ceil(pop * frac)

/// Cross-entropy minimisation with a diagonal Gaussian sampler. Candidates
/// are projected into the feasible set (box clamp unless a projector is
/// given); non-finite objective values trigger a bounded resample.
CemResult cem_optimize(const Objective& objective, const BoxBounds& bounds,
                       const CemOptions& opts, std::uint64_t seed,
                       const Projector& project = nullptr);

} // namespace acfs

#endif
