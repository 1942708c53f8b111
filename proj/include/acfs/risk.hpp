#ifndef ACFS_RISK_HPP
#define ACFS_RISK_HPP

#include <cstdint>
#include <vector>

#include "acfs/rng.hpp"

namespace acfs {

struct RiskParams {
    double lambda = 0.70; // CVaR weight, >= 0
    double alpha = 0.95;  // confidence level, in (0,1)
};

void validate(const RiskParams& p);

struct RiskEstimate {
    double total = 0.0;         // expected_cost + lambda * cvar
    double expected_cost = 0.0; // sample mean
    double cvar = 0.0;          // empirical CVaR_alpha
    int n_draws = 0;
};

/// Empirical CVaR as the fractionally weighted sorted-tail average: with
/// m = n*(1-alpha), the worst ceil(m) costs are averaged and the boundary
/// order statistic carries only the fractional weight m - floor(m). This
/// equals the minimum of the discrete Rockafellar-Uryasev objective
///   tau + mean(max(cost - tau, 0)) / (1 - alpha)
/// for every alpha and n.
double empirical_cvar(const std::vector<double>& costs, double alpha);

RiskEstimate spectral_risk(const std::vector<double>& costs, const RiskParams& params);

enum class BootstrapStat { Median, Mean };

// Percentile bootstrap interval of the chosen statistic.
std::pair<double, double> bootstrap_ci(const std::vector<double>& values, BootstrapStat statistic,
                                       int n_boot, double level, RngStream& rng);

} // namespace acfs

#endif
