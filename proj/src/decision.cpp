#include "acfs/decision.hpp"

#include <cmath>
#include <stdexcept>

namespace acfs {

BoxBounds decision_bounds() {
    BoxBounds b;
    b.lo = Eigen::VectorXd::Zero(6);
    b.hi = Eigen::VectorXd::Constant(6, kAllocHi);
    b.hi(5) = 1.0;
    return b;
}

bool is_feasible(const Decision& d, double tol) {
    for (int j = 0; j < 5; ++j)
        if (d.x(j) < -tol || d.x(j) > kAllocHi + tol) return false;
    if (d.x(5) < -tol || d.x(5) > 1.0 + tol) return false;
    return d.alloc_sum() <= kAllocBudget + tol;
}

Decision feasible_project(const Vec6& raw) {
    if (!raw.allFinite()) throw std::domain_error("feasible_project: non-finite input");
    Decision d;
    for (int j = 0; j < 5; ++j) d.x(j) = std::clamp(raw(j), 0.0, kAllocHi);
    d.x(5) = std::clamp(raw(5), 0.0, 1.0);
    const double s = d.alloc_sum();
    if (s > kAllocBudget) d.x.head<5>() *= kAllocBudget / s;
    return d;
}

Eigen::VectorXd clamp_to_box(const Eigen::VectorXd& x, const BoxBounds& b) {
    Eigen::VectorXd out = x;
    for (Eigen::Index i = 0; i < x.size(); ++i)
        out(i) = std::clamp(x(i), b.lo(i), b.hi(i));
    return out;
}

} // namespace acfs
