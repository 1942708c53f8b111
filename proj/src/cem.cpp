#include "acfs/cem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "acfs/rng.hpp"

namespace acfs {

int cem_elite_count(int pop_size, double elite_frac) {
    return static_cast<int>(std::ceil(pop_size * elite_frac));
}

CemResult cem_optimize(const Objective& objective, const BoxBounds& bounds,
                       const CemOptions& opts, std::uint64_t seed, const Projector& project) {
    const int dim = static_cast<int>(bounds.lo.size());
    const int n_elite = cem_elite_count(opts.pop_size, opts.elite_frac);
    if (n_elite < 1) throw std::domain_error("cem_optimize: pop_size * elite_frac must be >= 1");
    const Projector proj =
        project ? project : [&bounds](const Eigen::VectorXd& v) { return clamp_to_box(v, bounds); };

    Eigen::VectorXd mean =
        opts.init_mean.size() == dim ? opts.init_mean : ((bounds.lo + bounds.hi) / 2.0).eval();
    mean = proj(mean);
    Eigen::VectorXd sd =
        opts.init_sd.size() == dim ? opts.init_sd : (0.25 * (bounds.hi - bounds.lo)).eval();

    RngStream rng(seed);
    CemResult res;
    res.best_f = std::numeric_limits<double>::infinity();
    Eigen::MatrixXd pop(opts.pop_size, dim);
    Eigen::VectorXd scores(opts.pop_size);
    std::vector<int> order(opts.pop_size);

    for (int iter = 0; iter < opts.n_iters; ++iter) {
        for (int i = 0; i < opts.pop_size; ++i) {
            double f = std::numeric_limits<double>::quiet_NaN();
            Eigen::VectorXd cand(dim);
            int tries = 0;
            while (!std::isfinite(f)) {
                if (tries++ > opts.max_resample_retries)
                    throw std::runtime_error("cem_optimize: objective stayed non-finite after retries");
                for (int d = 0; d < dim; ++d) cand(d) = mean(d) + sd(d) * rng.normal();
                cand = proj(cand);
                f = objective(cand);
                ++res.n_evals;
            }
            pop.row(i) = cand.transpose();
            scores(i) = f;
            if (f < res.best_f) {
                res.best_f = f;
                res.best_x = cand;
            }
        }
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) { return scores(a) < scores(b); });
        Eigen::VectorXd elite_mean = Eigen::VectorXd::Zero(dim);
        for (int e = 0; e < n_elite; ++e) elite_mean += pop.row(order[e]).transpose();
        elite_mean /= n_elite;
        Eigen::VectorXd elite_sd = Eigen::VectorXd::Zero(dim);
        for (int e = 0; e < n_elite; ++e)
            elite_sd += (pop.row(order[e]).transpose() - elite_mean).cwiseAbs2();
        elite_sd = (elite_sd / std::max(1, n_elite - 1)).cwiseSqrt();
        mean = opts.smoothing * elite_mean + (1.0 - opts.smoothing) * mean;
        sd = opts.smoothing * elite_sd + (1.0 - opts.smoothing) * sd;
    }
    res.mean = proj(mean);
    res.population = pop;
    res.scores = scores;
    return res;
}

} // namespace acfs
