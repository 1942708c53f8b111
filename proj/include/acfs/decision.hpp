#ifndef ACFS_DECISION_HPP
#define ACFS_DECISION_HPP

#include <Eigen/Core>

namespace acfs {

using Vec5 = Eigen::Matrix<double, 5, 1>;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using MatX5 = Eigen::Matrix<double, Eigen::Dynamic, 5>;

// Feasible set: x_1..x_5 in [0, 0.70], x_6 in [0, 1], sum(x_1..x_5) <= 0.85.
constexpr double kAllocHi = 0.70;
constexpr double kAllocBudget = 0.85;

struct Decision {
    Vec6 x = Vec6::Zero();

    double alloc_sum() const { return x.head<5>().sum(); }
    // residual allocation x_0 = max(0, 1 - sum_{j<=5} x_j)
    double residual() const { return std::max(0.0, 1.0 - alloc_sum()); }
};

struct BoxBounds {
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;
};

BoxBounds decision_bounds();

bool is_feasible(const Decision& d, double tol = 1e-12);

// Clamp x_1..x_5 into [0,0.70] and x_6 into [0,1]; if the allocation sum
// exceeds 0.85, rescale x_1..x_5 by 0.85/sum. Idempotent.
Decision feasible_project(const Vec6& raw);

Eigen::VectorXd clamp_to_box(const Eigen::VectorXd& x, const BoxBounds& b);

} // namespace acfs

#endif
