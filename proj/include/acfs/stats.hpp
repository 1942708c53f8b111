#ifndef ACFS_STATS_HPP
#define ACFS_STATS_HPP

#include <vector>

namespace acfs {

struct SummaryStats {
    double median = 0.0;
    double sd = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
    bool sd_defined = true; // false for single-element samples (sd reported as 0)
};

// median: midpoint of the middle two; sd: (n-1) denominator;
// quartiles: type-7 linear interpolation of order statistics.
SummaryStats summarize(const std::vector<double>& values);

double quantile_type7(std::vector<double> values, double p);
double quantile_type7_sorted(const std::vector<double>& sorted, double p);
double median_of(std::vector<double> values);

enum class Alternative { Less, Greater, TwoSided };
enum class WilcoxonMode { Auto, ForceExact, ForceNormal };

struct WilcoxonResult {
    double p = 1.0;
    double w_plus = 0.0;
    double w_minus = 0.0;
    int n_used = 0;        // after dropping exact zeros
    bool degenerate = false;
    bool exact_path = false;
};

/// Paired signed-rank test on the given differences. Zeros are dropped, ties
/// get average ranks. Auto mode enumerates the exact null distribution for
/// n <= 12 without ties, otherwise uses the normal approximation with
/// tie-corrected variance and continuity correction. The exact path is a
/// dynamic program over rank sums, usable up to n ~ 60 when forced.
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& diffs, Alternative alternative,
                                    WilcoxonMode mode = WilcoxonMode::Auto);

// Holm step-down adjustment; output is elementwise >= input, capped at 1,
// in the original order.
std::vector<double> holm_adjust(const std::vector<double>& p_values);

struct RankBiserialResult {
    double r = 0.0;         // (T+ - T-) / (T+ + T-)
    double magnitude = 0.0; // |r|
    bool degenerate = false;
};

RankBiserialResult rank_biserial(const std::vector<double>& diffs);

// Fraction of strictly negative differences; exact zeros count half.
double win_rate(const std::vector<double>& diffs);

} // namespace acfs

#endif
