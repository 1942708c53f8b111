#include "acfs/lhd.hpp"

#include <limits>
#include <numeric>
#include <stdexcept>

#include "acfs/rng.hpp"

namespace acfs {

double min_pairwise_distance(const Eigen::MatrixXd& points) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < points.rows(); ++i)
        for (Eigen::Index j = i + 1; j < points.rows(); ++j)
            best = std::min(best, (points.row(i) - points.row(j)).norm());
    return best;
}

Eigen::MatrixXd maximin_lhd_unit(int n, int dim, std::uint64_t seed, int n_restarts) {
    if (n < 1 || dim < 1) throw std::domain_error("maximin_lhd: n and dim must be positive");
    n_restarts = std::max(1, n_restarts);
    Eigen::MatrixXd best;
    double best_score = -1.0;
    std::vector<int> perm(n);
    for (int r = 0; r < n_restarts; ++r) {
        RngStream rng(derive_seed(seed, {static_cast<std::uint64_t>(r), hash_label("lhd")}));
        Eigen::MatrixXd pts(n, dim);
        for (int d = 0; d < dim; ++d) {
            std::iota(perm.begin(), perm.end(), 0);
            for (int i = 0; i < n - 1; ++i) {
                const int j = i + static_cast<int>(rng.integer(n - i));
                std::swap(perm[i], perm[j]);
            }
            for (int i = 0; i < n; ++i) pts(i, d) = (perm[i] + rng.uniform()) / n;
        }
        const double score = n > 1 ? min_pairwise_distance(pts) : 1.0;
        if (score > best_score) {
            best_score = score;
            best = pts;
        }
    }
    return best;
}

Eigen::MatrixXd maximin_lhd(int n, const BoxBounds& bounds, std::uint64_t seed, int n_restarts) {
    const int dim = static_cast<int>(bounds.lo.size());
    Eigen::MatrixXd unit = maximin_lhd_unit(n, dim, seed, n_restarts);
    for (int i = 0; i < n; ++i)
        for (int d = 0; d < dim; ++d)
            unit(i, d) = bounds.lo(d) + unit(i, d) * (bounds.hi(d) - bounds.lo(d));
    return unit;
}

std::vector<Decision> maximin_lhd_decisions(int n, std::uint64_t seed, int n_restarts) {
    const Eigen::MatrixXd pts = maximin_lhd(n, decision_bounds(), seed, n_restarts);
    std::vector<Decision> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = feasible_project(pts.row(i).transpose());
    return out;
}

} // namespace acfs
