#include "acfs/fd_gradient.hpp"

#include <cmath>
#include <stdexcept>

namespace acfs {

Vec6 fd_gradient_crn(const CostFn& cost_fn, const RiskParams& params, const Decision& x,
                     const ScenarioMatrix& cached, double step) {
    if (!(step > 0.0)) throw std::domain_error("fd_gradient_crn: step must be positive");
    const auto risk_at = [&](const Decision& d) {
        return spectral_risk(cost_fn(cached.w, d), params).total;
    };
    Vec6 g;
    const double f0 = risk_at(x); // reused by one-sided fallbacks
    for (int j = 0; j < 6; ++j) {
        Vec6 up = x.x, dn = x.x;
        up(j) += step;
        dn(j) -= step;
        const Decision xp = feasible_project(up);
        const Decision xm = feasible_project(dn);
        const double eff = 0.5 * (xp.x(j) - xm.x(j));
        if (eff > 1e-14) {
            g(j) = (risk_at(xp) - risk_at(xm)) / (2.0 * eff);
            continue;
        }
        // both probes collapsed onto x in coordinate j: try one-sided
        const double up_step = xp.x(j) - x.x(j);
        const double dn_step = x.x(j) - xm.x(j);
        if (up_step > 1e-14) g(j) = (risk_at(xp) - f0) / up_step;
        else if (dn_step > 1e-14) g(j) = (f0 - risk_at(xm)) / dn_step;
        else g(j) = 0.0;
    }
    return g;
}

Eigen::VectorXd numeric_gradient(const Objective& f, const Eigen::VectorXd& x, double step,
                                 const Projector& project) {
    const auto fix = [&](Eigen::VectorXd v) { return project ? project(v) : v; };
    Eigen::VectorXd g(x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        Eigen::VectorXd up = x, dn = x;
        up(j) += step;
        dn(j) -= step;
        const Eigen::VectorXd xp = fix(up), xm = fix(dn);
        const double eff = xp(j) - xm(j);
        g(j) = eff > 1e-14 ? (f(xp) - f(xm)) / eff : 0.0;
    }
    return g;
}

} // namespace acfs
