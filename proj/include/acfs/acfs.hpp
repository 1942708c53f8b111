#ifndef ACFS_ACFS_HPP
#define ACFS_ACFS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "acfs/config.hpp"
#include "acfs/de.hpp"
#include "acfs/dgp.hpp"
#include "acfs/forest.hpp"

namespace acfs {

struct AcfsConfig {
    int n_a = 1200;          // stage-A LHD size
    int n_b = 700;           // stage-B augmentation draws
    int k_elites = 4;
    double aug_radius = 0.025;
    int grf_trees = 70;
    int grf_min_node = 15;
    int de_iters = 55;
    int de_pop = 85;
    int n_c = 100;           // KDE surrogate draws per DE evaluation
    int n_f = 800;           // forest surrogate draws
    int n_d = 450;           // direct-DGP draws
    int shortlist = 60;      // stage-1 survivors
    int n_seeds = 30;        // refinement starts
    int local_maxit = 80;
    int cem_iters = 7;
    int cem_pop = 35;
    int cem_mc = 300;
    double cem_seed_sd = 0.04;
    double cem_seed_frac = 1.0 / 3.0;
    double elite_ratio = 0.6; // geometric rank-weight ratio
    int pool_de_members = 30;
    int pool_perturb_per_elite = 8;
    int pool_safety_net = 60;
    int pool_cem_draws = 25;
    double kde_x_bandwidth = 0.15;
    double bandwidth_scale = 1.0;
    int lhd_restarts = 10;
    double fd_step = 1e-4;

    // ablation switches
    bool no_cem = false;
    bool no_aug = false;
    bool no_rerank = false;
    bool no_av = false;

    // Desk profile: divide MC and phase budgets, keeping structural
    // parameters and sane floors; n_d stays even for antithetic pairing.
    void scale_budgets(double divisor);

    void apply_config(const KeyValueConfig& cfg); // keys under "acfs."
};

struct Solution {
    Decision x_star;
    RiskEstimate oracle_estimate; // common-seed confirmation value
    OracleLedger ledger;
    std::map<std::string, double> phase_seconds;
    std::map<std::string, double> diagnostics;
};

struct Phase1Result {
    std::vector<Decision> elites;
    TrainingSet data;
    ForestModel forest;
    bool has_cem = false;
    Vec6 mu_cem = Vec6::Zero();
    std::vector<Decision> de_members; // final DE population, ascending surrogate score
    std::vector<double> de_scores;
};

struct Phase2Result {
    TrainingSet data;
    ForestModel forest;
};

// Largest-remainder allocation of `total` over geometric rank weights
// ratio^k, k = 0..k_elites-1.
std::vector<int> geometric_allocation(int total, int k_elites, double ratio);

Phase1Result phase1_explore(const Oracle& oracle, const AcfsConfig& cfg, const RiskParams& params,
                            std::uint64_t seed, OracleLedger& ledger);

Phase2Result phase2_augment(const Phase1Result& p1, const Oracle& oracle, const AcfsConfig& cfg,
                            std::uint64_t seed, OracleLedger& ledger);

std::vector<Decision> build_candidate_pool(const Phase1Result& p1, const AcfsConfig& cfg,
                                           std::uint64_t seed);

// Stage-1 scorer abstracted so tests can inject corrupted surrogates.
using SurrogateScorer = std::function<double(const Decision&)>;

std::vector<Decision> phase3_rerank(const std::vector<Decision>& pool,
                                    const SurrogateScorer& stage1_score, const Oracle& oracle,
                                    const AcfsConfig& cfg, const RiskParams& params,
                                    std::uint64_t seed, OracleLedger& ledger);

Solution phase4_refine(const std::vector<Decision>& seeds, const Oracle& oracle,
                       const AcfsConfig& cfg, const RiskParams& params, std::uint64_t seed,
                       OracleLedger& ledger);

Solution run_acfs(const Oracle& oracle, const AcfsConfig& cfg, const RiskParams& params,
                  std::uint64_t master_seed);

// Closed-form scenario budgets for the deterministic phases.
long long phase1_budget(const AcfsConfig& cfg);    // N_A + cem draws
long long phase1_cem_budget(const AcfsConfig& cfg);
long long phase2_budget(const AcfsConfig& cfg);
long long phase3_budget(const AcfsConfig& cfg);

} // namespace acfs

#endif
