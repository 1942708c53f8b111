#include "acfs/kde.hpp"

#include <cmath>
#include <stdexcept>

#include "acfs/rng.hpp"

namespace acfs {

DecisionKde::DecisionKde(TrainingSet data, double x_bandwidth, double w_bandwidth_scale)
    : data_(std::move(data)), bw_x_(x_bandwidth) {
    if (data_.size() < 2) throw std::domain_error("DecisionKde: need at least 2 training points");
    if (!(bw_x_ > 0.0)) throw std::domain_error("DecisionKde: bandwidth must be positive");
    h_ = silverman_bandwidth(data_, w_bandwidth_scale);
}

Eigen::VectorXd DecisionKde::weights(const Decision& x) const {
    const int n = data_.size();
    Eigen::VectorXd sq(n);
    for (int i = 0; i < n; ++i) sq(i) = (data_.x[i].x - x.x).squaredNorm();
    const double base = sq.minCoeff();
    Eigen::VectorXd w(n);
    const double inv = 1.0 / (2.0 * bw_x_ * bw_x_);
    for (int i = 0; i < n; ++i) w(i) = std::exp(-(sq(i) - base) * inv);
    return w / w.sum();
}

MatX5 DecisionKde::draw(const Decision& x, int n, std::uint64_t seed) const {
    const Eigen::VectorXd w = weights(x);
    const std::vector<int> picks =
        systematic_resample(w, n, derive_seed(seed, {hash_label("kde_resample")}));
    RngStream jitter(derive_seed(seed, {hash_label("kde_jitter")}));
    MatX5 out(n, 5);
    for (int r = 0; r < n; ++r)
        for (int j = 0; j < 5; ++j) out(r, j) = data_.w(picks[r], j) + h_(j) * jitter.normal();
    return out;
}

RiskEstimate DecisionKde::risk(const Decision& x, int n, const RiskParams& params,
                               const CostFn& cost_fn, std::uint64_t seed) const {
    return spectral_risk(cost_fn(draw(x, n, seed), x), params);
}

} // namespace acfs
