#include "acfs/adam.hpp"

#include <cmath>

#include "acfs/rng.hpp"

namespace acfs {

AdamResult adam_optimize(const BatchObjective& objective, const Eigen::VectorXd& x0,
                         const AdamOptions& opts, const BoxBounds& bounds, std::uint64_t seed,
                         const Projector& project) {
    const Projector proj =
        project ? project : [&bounds](const Eigen::VectorXd& v) { return clamp_to_box(v, bounds); };
    const Eigen::Index dim = x0.size();
    AdamResult res;
    Eigen::VectorXd x = proj(x0);
    Eigen::VectorXd m = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);

    for (int t = 1; t <= opts.n_iters; ++t) {
        const std::uint64_t batch_seed = derive_seed(seed, {static_cast<std::uint64_t>(t)});
        Eigen::VectorXd g(dim);
        for (Eigen::Index j = 0; j < dim; ++j) {
            Eigen::VectorXd up = x, dn = x;
            up(j) += opts.fd_step;
            dn(j) -= opts.fd_step;
            const Eigen::VectorXd xp = proj(up), xm = proj(dn);
            const double eff = xp(j) - xm(j);
            if (eff > 1e-14) {
                g(j) = (objective(xp, batch_seed) - objective(xm, batch_seed)) / eff;
                res.n_batch_evals += 2;
            } else {
                g(j) = 0.0;
            }
        }
        m = opts.beta1 * m + (1.0 - opts.beta1) * g;
        v = opts.beta2 * v + (1.0 - opts.beta2) * g.cwiseAbs2();
        const double mhat_scale = 1.0 / (1.0 - std::pow(opts.beta1, t));
        const double vhat_scale = 1.0 / (1.0 - std::pow(opts.beta2, t));
        const double lr = opts.lr0 / (1.0 + opts.lr_decay * t);
        const Eigen::VectorXd step =
            (m * mhat_scale).cwiseQuotient(((v * vhat_scale).cwiseSqrt().array() + opts.eps).matrix());
        x = proj(x - lr * step);
    }
    res.x = x;
    return res;
}

} // namespace acfs
