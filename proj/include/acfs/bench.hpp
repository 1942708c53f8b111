#ifndef ACFS_BENCH_HPP
#define ACFS_BENCH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "acfs/acfs.hpp"
#include "acfs/baselines.hpp"
#include "acfs/results.hpp"
#include "acfs/stats.hpp"

namespace acfs {

// Method labels: the five optimisers plus the ACFS ablation variants.
inline const std::vector<std::string> kMethodLabels{"acfs", "gpbo", "cemso", "sgdcvar", "kdeso"};
inline const std::vector<std::string> kAblationLabels{"acfs_full", "acfs_noav", "acfs_nocem",
                                                      "acfs_norerank", "acfs_noaug"};

std::string method_display(const std::string& label); // "acfs" -> "ACFS" etc.
bool is_known_label(const std::string& label);

struct ExperimentPlan {
    std::vector<DgpKind> dgps{DgpKind::Dgp1, DgpKind::Dgp2};
    std::vector<double> lambdas{0.50, 0.70, 0.90};
    double alpha = 0.95;
    std::vector<std::string> methods = kMethodLabels;
    int n_replications = 100;
    std::uint64_t master_seed = 1;
    int oracle_eval_draws = 2000;
    int bootstrap_reps = 400;
    double scale_divisor = 1.0; // desk profile divisor
    int workers = 1;
    bool record_timing = true; // false writes 0.000 in the seconds column
    int ablation_reps = 50;
    int sensitivity_reps = 20;
    AcfsConfig acfs;
    BaselineConfig baselines;
    KeyValueConfig dgp_constants; // cost-coefficient overrides

    void validate_plan() const;
    AcfsConfig effective_acfs() const;
    BaselineConfig effective_baselines() const;
    static ExperimentPlan from_config(const KeyValueConfig& cfg);
};

Solution run_labeled_method(const std::string& label, const Oracle& oracle,
                            const RiskParams& params, AcfsConfig acfs_cfg,
                            const BaselineConfig& baseline_cfg, std::uint64_t seed);

// Deterministic label-keyed seeds: adding methods or replications never
// perturbs other rows' streams.
std::uint64_t run_seed(std::uint64_t master, const std::string& dgp, double lambda,
                       const std::string& method, int rep);
std::uint64_t eval_seed(std::uint64_t master, const std::string& dgp, double lambda, int rep);

// Runs (or resumes) the plan; returns the results file path.
std::string run_experiment(const ExperimentPlan& plan, const std::string& out_dir);

struct MethodSummary {
    std::string method;
    int n = 0;
    SummaryStats j;
    double ec_median = 0.0;
    double gap_pct = 0.0; // relative median gap to the reference method
};

struct PairedComparison {
    std::string competitor;
    int n_pairs = 0;
    double med_diff = 0.0; // reference - competitor
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double p_raw = 1.0;
    double p_holm = 1.0;
    double r_rb = 0.0;
    double win_pct = 0.0;
};

struct BlockSummary {
    std::string dgp;
    double lambda = 0.0;
    std::string reference;
    std::vector<MethodSummary> methods;
    std::vector<PairedComparison> comparisons;
};

std::vector<BlockSummary> summarize_rows(const std::vector<ReplicationRow>& rows,
                                         const std::string& reference, int bootstrap_reps);
std::vector<BlockSummary> summarize_experiment(const std::string& results_path,
                                               const std::string& out_dir,
                                               const std::string& reference = "acfs",
                                               int bootstrap_reps = 400);

struct AblationRow {
    std::string dgp;
    std::string variant;
    int n = 0;
    double j_med = 0.0;
    double j_sd = 0.0;
    double gap_pct = 0.0;
    double sigma_ratio = 0.0; // SD(variant) / SD(full)
    double p_holm = 1.0;      // vs acfs_full, two-sided
};

std::vector<AblationRow> run_ablation(const ExperimentPlan& plan, const std::string& out_dir);
std::vector<AblationRow> ablation_table(const std::vector<ReplicationRow>& rows);

struct SensitivityPoint {
    std::string parameter;
    double value = 0.0;
    bool is_default = false;
    int n = 0;
    SummaryStats j;
};

struct SensitivityGridEntry {
    std::string parameter;
    std::vector<double> values;
    double default_value;
};
std::vector<SensitivityGridEntry> sensitivity_grid();

std::vector<SensitivityPoint> run_sensitivity(const ExperimentPlan& plan,
                                              const std::string& out_dir);

} // namespace acfs

#endif
