#include "acfs/risk.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "acfs/stats.hpp"

namespace acfs {

void validate(const RiskParams& p) {
    if (p.lambda < 0.0) throw std::domain_error("RiskParams: lambda must be nonnegative");
    if (!(p.alpha > 0.0 && p.alpha < 1.0)) throw std::domain_error("RiskParams: alpha must lie in (0,1)");
}

double empirical_cvar(const std::vector<double>& costs, double alpha) {
    if (costs.empty()) throw std::domain_error("empirical_cvar: empty sample");
    if (!(alpha >= 0.0 && alpha < 1.0)) throw std::domain_error("empirical_cvar: alpha must lie in [0,1)");
    const int n = static_cast<int>(costs.size());
    const double m = n * (1.0 - alpha);
    std::vector<double> sorted(costs);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const int k = static_cast<int>(std::ceil(m - 1e-12)); // worst k order statistics
    double acc = 0.0;
    for (int i = 0; i + 1 < k; ++i) acc += sorted[i];
    acc += (m - (k - 1)) * sorted[k - 1]; // boundary statistic, fractional weight
    return acc / m;
}

RiskEstimate spectral_risk(const std::vector<double>& costs, const RiskParams& params) {
    RiskEstimate est;
    est.n_draws = static_cast<int>(costs.size());
    if (costs.empty()) throw std::domain_error("spectral_risk: empty sample");
    est.expected_cost = std::accumulate(costs.begin(), costs.end(), 0.0) / est.n_draws;
    est.cvar = empirical_cvar(costs, params.alpha);
    est.total = est.expected_cost + params.lambda * est.cvar;
    return est;
}

namespace {

double stat_of(std::vector<double>& sample, BootstrapStat s) {
    if (s == BootstrapStat::Mean)
        return std::accumulate(sample.begin(), sample.end(), 0.0) / sample.size();
    std::sort(sample.begin(), sample.end());
    const std::size_t n = sample.size();
    return n % 2 == 1 ? sample[n / 2] : 0.5 * (sample[n / 2 - 1] + sample[n / 2]);
}

} // namespace

std::pair<double, double> bootstrap_ci(const std::vector<double>& values, BootstrapStat statistic,
                                       int n_boot, double level, RngStream& rng) {
    if (values.empty()) throw std::domain_error("bootstrap_ci: empty sample");
    if (n_boot < 2) throw std::domain_error("bootstrap_ci: n_boot must be at least 2");
    if (!(level > 0.0 && level < 1.0)) throw std::domain_error("bootstrap_ci: level must lie in (0,1)");
    const std::size_t n = values.size();
    std::vector<double> stats(n_boot);
    std::vector<double> resample(n);
    for (int b = 0; b < n_boot; ++b) {
        for (std::size_t i = 0; i < n; ++i) resample[i] = values[rng.integer(n)];
        stats[b] = stat_of(resample, statistic);
    }
    std::sort(stats.begin(), stats.end());
    const double tail = 0.5 * (1.0 - level);
    return {quantile_type7_sorted(stats, tail), quantile_type7_sorted(stats, 1.0 - tail)};
}

} // namespace acfs
