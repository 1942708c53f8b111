#ifndef ACFS_KDE_HPP
#define ACFS_KDE_HPP

#include <cstdint>

#include "acfs/forest.hpp"

namespace acfs {

/// Decision-weighted Gaussian KDE over training outcomes: training pairs are
/// weighted by an isotropic Gaussian kernel in decision space, outcomes are
/// systematically resampled under those weights, and Silverman-rule jitter is
/// added per component. Serves as the cheap surrogate for DE in the
/// exploration phase and as the KDE-SO baseline surrogate.
class DecisionKde {
public:
    DecisionKde(TrainingSet data, double x_bandwidth = 0.15, double w_bandwidth_scale = 1.0);

    Eigen::VectorXd weights(const Decision& x) const; // sums to 1
    MatX5 draw(const Decision& x, int n, std::uint64_t seed) const;
    RiskEstimate risk(const Decision& x, int n, const RiskParams& params, const CostFn& cost_fn,
                      std::uint64_t seed) const;

    const TrainingSet& data() const { return data_; }
    double x_bandwidth() const { return bw_x_; }

private:
    TrainingSet data_;
    double bw_x_;
    Vec5 h_;
};

} // namespace acfs

#endif
