#ifndef ACFS_BASELINES_HPP
#define ACFS_BASELINES_HPP

#include <cstdint>
#include <vector>

#include "acfs/acfs.hpp"
#include "acfs/config.hpp"
#include "acfs/dgp.hpp"

namespace acfs {

struct BaselineConfig {
    // GP-BO
    int gp_n_init = 18;
    int gp_bo_steps = 25;
    int gp_mc = 130;
    int gp_refit_every = 5;
    int gp_candidates = 2000;
    int gp_polish_maxit = 40;
    // CEM-SO
    int cem_iters = 12;
    int cem_pop = 55;
    double cem_elite_frac = 0.15;
    double cem_smoothing = 0.60;
    int cem_mc = 130;
    int cem_polish_mult = 4; // polish draws = mult * mc
    int cem_polish_maxit = 40;
    // SGD-CVaR
    int sgd_warm_chains = 2;
    int sgd_warm_iters = 80;
    int sgd_fine_iters = 160;
    int sgd_batch = 60;
    int sgd_rescore_mc = 500;
    int sgd_polish_mc = 500;
    int sgd_polish_maxit = 40;
    // KDE-SO
    int kde_train = 2600;
    int kde_mc = 100;
    double kde_x_bandwidth = 0.15;
    int kde_de_iters = 55;
    int kde_de_pop = 85;
    int kde_starts = 5;
    int kde_polish_maxit = 40;
    int kde_final_mc = 500;

    int lhd_restarts = 10;
    double fd_step = 1e-4;

    int cem_polish_mc() const { return cem_polish_mult * cem_mc; }

    void scale_budgets(double divisor);
    void apply_config(const KeyValueConfig& cfg); // keys under "baselines."
};

// Hyperparameter refits happen after these acquisition indices (1-based).
std::vector<int> gp_refit_acquisitions(int bo_steps, int refit_every);

Solution run_gp_bo(const Oracle& oracle, const RiskParams& params, const BaselineConfig& cfg,
                   std::uint64_t seed);
Solution run_cem_so(const Oracle& oracle, const RiskParams& params, const BaselineConfig& cfg,
                    std::uint64_t seed);
Solution run_sgd_cvar(const Oracle& oracle, const RiskParams& params, const BaselineConfig& cfg,
                      std::uint64_t seed);
Solution run_kde_so(const Oracle& oracle, const RiskParams& params, const BaselineConfig& cfg,
                    std::uint64_t seed);

} // namespace acfs

#endif
