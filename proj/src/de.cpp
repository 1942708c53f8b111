#include "acfs/de.hpp"

#include <stdexcept>

#include "acfs/rng.hpp"

namespace acfs {

Population de_optimize(const Objective& objective, Population pop, const BoxBounds& bounds,
                       const DeOptions& opts, std::uint64_t seed, const Projector& project) {
    const int n = pop.size();
    const int dim = static_cast<int>(pop.members.cols());
    if (n < 4) throw std::domain_error("de_optimize: population must have at least 4 members");
    const Projector proj =
        project ? project : [&bounds](const Eigen::VectorXd& v) { return clamp_to_box(v, bounds); };

    if (pop.scores.size() != n) {
        pop.scores.resize(n);
        for (int i = 0; i < n; ++i) pop.scores(i) = objective(pop.members.row(i).transpose());
    }
    RngStream rng(seed);
    int best = 0;
    for (int i = 1; i < n; ++i)
        if (pop.scores(i) < pop.scores(best)) best = i;

    for (int iter = 0; iter < opts.n_iters; ++iter) {
        for (int i = 0; i < n; ++i) {
            int r1 = static_cast<int>(rng.integer(n));
            while (r1 == i) r1 = static_cast<int>(rng.integer(n));
            int r2 = static_cast<int>(rng.integer(n));
            while (r2 == i || r2 == r1) r2 = static_cast<int>(rng.integer(n));

            const Eigen::VectorXd xi = pop.members.row(i).transpose();
            Eigen::VectorXd v = xi + opts.f * (pop.members.row(best).transpose() - xi) +
                                opts.f * (pop.members.row(r1) - pop.members.row(r2)).transpose();
            Eigen::VectorXd trial = xi;
            const int jrand = static_cast<int>(rng.integer(dim));
            for (int j = 0; j < dim; ++j)
                if (rng.uniform() < opts.cr || j == jrand) trial(j) = v(j);
            trial = proj(trial);
            const double f_trial = objective(trial);
            if (f_trial < pop.scores(i)) { // strict: ties keep the incumbent
                pop.members.row(i) = trial.transpose();
                pop.scores(i) = f_trial;
                if (f_trial < pop.scores(best)) best = i;
            }
        }
    }
    return pop;
}

} // namespace acfs
