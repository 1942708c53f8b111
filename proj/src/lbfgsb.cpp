#include "acfs/lbfgsb.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>

namespace acfs {

namespace {

struct Pair {
    Eigen::VectorXd s;
    Eigen::VectorXd y;
    double rho;
};

// Two-loop recursion restricted to the free coordinates (active ones are
// zeroed in the input gradient and in the output direction).
Eigen::VectorXd two_loop(const std::deque<Pair>& mem, const Eigen::VectorXd& g) {
    Eigen::VectorXd q = g;
    std::vector<double> alpha(mem.size());
    for (int i = static_cast<int>(mem.size()) - 1; i >= 0; --i) {
        alpha[i] = mem[i].rho * mem[i].s.dot(q);
        q -= alpha[i] * mem[i].y;
    }
    if (!mem.empty()) {
        const Pair& last = mem.back();
        const double gamma = last.s.dot(last.y) / last.y.squaredNorm();
        q *= gamma;
    }
    for (std::size_t i = 0; i < mem.size(); ++i) {
        const double beta = mem[i].rho * mem[i].y.dot(q);
        q += (alpha[i] - beta) * mem[i].s;
    }
    return q;
}

} // namespace

QuasiNewtonResult bounded_quasi_newton(const Objective& objective, const GradientFn& gradient,
                                       const Eigen::VectorXd& x0, const BoxBounds& bounds,
                                       const QuasiNewtonOptions& opts, const Projector& project,
                                       const IterateCallback& on_iterate) {
    const Projector proj =
        project ? project : [&bounds](const Eigen::VectorXd& v) { return clamp_to_box(v, bounds); };
    const Eigen::Index dim = x0.size();

    QuasiNewtonResult res;
    Eigen::VectorXd x = proj(x0);
    if (on_iterate) on_iterate(x, 0);
    double fx = objective(x);
    ++res.n_evals;
    if (!std::isfinite(fx))
        throw std::runtime_error("bounded_quasi_newton: objective non-finite at start");
    Eigen::VectorXd g = gradient(x);

    res.x = x;
    res.f = fx;
    std::deque<Pair> mem;
    const double bound_eps = 1e-10;

    for (int iter = 1; iter <= opts.max_iter; ++iter) {
        // projected gradient: x - proj(x - g)
        const Eigen::VectorXd pg = x - proj(x - g);
        if (pg.cwiseAbs().maxCoeff() <= opts.pg_tol) {
            res.converged = true;
            break;
        }
        // freeze coordinates pinned at a bound with the gradient pushing out
        Eigen::VectorXd g_free = g;
        for (Eigen::Index i = 0; i < dim; ++i) {
            const bool at_lo = x(i) <= bounds.lo(i) + bound_eps && g(i) > 0.0;
            const bool at_hi = x(i) >= bounds.hi(i) - bound_eps && g(i) < 0.0;
            if (at_lo || at_hi) g_free(i) = 0.0;
        }
        Eigen::VectorXd d = -two_loop(mem, g_free);
        for (Eigen::Index i = 0; i < dim; ++i)
            if (g_free(i) == 0.0 && g(i) != 0.0) d(i) = 0.0;
        if (d.dot(g) >= 0.0) d = -g_free; // curvature hiccup: steepest descent

        // backtracking Armijo along the projected path
        double alpha = 1.0;
        double f_new = fx;
        Eigen::VectorXd x_new = x;
        bool accepted = false;
        for (int ls = 0; ls < opts.max_line_search; ++ls) {
            const Eigen::VectorXd trial = proj(x + alpha * d);
            const Eigen::VectorXd delta = trial - x;
            if (delta.cwiseAbs().maxCoeff() < opts.step_tol) break;
            const double f_trial = objective(trial);
            ++res.n_evals;
            if (std::isfinite(f_trial) && f_trial <= fx + opts.armijo_c1 * g.dot(delta)) {
                x_new = trial;
                f_new = f_trial;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) break; // no acceptable step

        if (on_iterate) on_iterate(x_new, iter);
        // with a per-iterate cache the objective changes here; refresh both
        const double f_iterate = on_iterate ? objective(x_new) : f_new;
        if (on_iterate) ++res.n_evals;
        const Eigen::VectorXd g_new = gradient(x_new);

        const Eigen::VectorXd s = x_new - x;
        const Eigen::VectorXd y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            mem.push_back({s, y, 1.0 / sy});
            if (static_cast<int>(mem.size()) > opts.memory) mem.pop_front();
        }
        x = x_new;
        fx = f_iterate;
        g = g_new;
        res.iterations = iter;
        if (fx < res.f) {
            res.f = fx;
            res.x = x;
        }
        if (s.cwiseAbs().maxCoeff() < opts.step_tol) break;
    }
    return res;
}

} // namespace acfs
