#include "acfs/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "acfs/adam.hpp"
#include "acfs/fd_gradient.hpp"
#include "acfs/gp.hpp"
#include "acfs/kde.hpp"
#include "acfs/lbfgsb.hpp"
#include "acfs/lhd.hpp"

namespace acfs {

namespace {

Decision as_decision(const Eigen::VectorXd& v) {
    Decision d;
    d.x = v;
    return d;
}

Projector decision_projector() {
    return [](const Eigen::VectorXd& v) { return feasible_project(Vec6(v)).x; };
}

// Deterministic direct-oracle objective for the quasi-Newton polish: every
// evaluation redraws scenarios at the query point under one fixed seed, so
// the objective is a smooth deterministic function of x (no cached-matrix
// CRN, no antithetic pairing).
Objective polish_objective(const Oracle& oracle, const RiskParams& params, int n_draws,
                           std::uint64_t seed, OracleLedger& ledger, const std::string& line) {
    return [&oracle, params, n_draws, seed, &ledger, line](const Eigen::VectorXd& v) {
        return oracle_evaluate(oracle, as_decision(v), n_draws, params, seed, false, &ledger, line)
            .total;
    };
}

QuasiNewtonResult polish(const Objective& obj, const Eigen::VectorXd& x0, int maxit,
                         double fd_step) {
    const GradientFn grad = [&obj, fd_step](const Eigen::VectorXd& v) {
        return numeric_gradient(obj, v, fd_step, decision_projector());
    };
    QuasiNewtonOptions opts;
    opts.max_iter = maxit;
    return bounded_quasi_newton(obj, grad, x0, decision_bounds(), opts, decision_projector());
}

} // namespace

void BaselineConfig::scale_budgets(double divisor) {
    if (divisor <= 1.0) return;
    const auto scaled = [divisor](int v, int floor_v) {
        return std::max(floor_v, static_cast<int>(std::llround(v / divisor)));
    };
    gp_n_init = scaled(gp_n_init, 6);
    gp_bo_steps = scaled(gp_bo_steps, 3);
    gp_mc = scaled(gp_mc, 8);
    gp_candidates = scaled(gp_candidates, 100);
    gp_polish_maxit = scaled(gp_polish_maxit, 8);
    cem_iters = scaled(cem_iters, 3);
    cem_pop = scaled(cem_pop, 8);
    cem_mc = scaled(cem_mc, 8);
    cem_polish_maxit = scaled(cem_polish_maxit, 8);
    sgd_warm_iters = scaled(sgd_warm_iters, 5);
    sgd_fine_iters = scaled(sgd_fine_iters, 10);
    sgd_batch = scaled(sgd_batch, 8);
    sgd_rescore_mc = scaled(sgd_rescore_mc, 16);
    sgd_polish_mc = scaled(sgd_polish_mc, 16);
    sgd_polish_maxit = scaled(sgd_polish_maxit, 8);
    kde_train = scaled(kde_train, 64);
    kde_mc = scaled(kde_mc, 8);
    kde_de_iters = scaled(kde_de_iters, 5);
    kde_de_pop = scaled(kde_de_pop, 8);
    kde_starts = scaled(kde_starts, 2);
    kde_polish_maxit = scaled(kde_polish_maxit, 8);
    kde_final_mc = scaled(kde_final_mc, 16);
}

void BaselineConfig::apply_config(const KeyValueConfig& cfg) {
    gp_n_init = static_cast<int>(cfg.get_int("baselines.gp.n_init", gp_n_init));
    gp_bo_steps = static_cast<int>(cfg.get_int("baselines.gp.bo_steps", gp_bo_steps));
    gp_mc = static_cast<int>(cfg.get_int("baselines.gp.mc", gp_mc));
    gp_refit_every = static_cast<int>(cfg.get_int("baselines.gp.refit_every", gp_refit_every));
    gp_candidates = static_cast<int>(cfg.get_int("baselines.gp.candidates", gp_candidates));
    gp_polish_maxit = static_cast<int>(cfg.get_int("baselines.gp.polish_maxit", gp_polish_maxit));
    cem_iters = static_cast<int>(cfg.get_int("baselines.cem.iters", cem_iters));
    cem_pop = static_cast<int>(cfg.get_int("baselines.cem.pop", cem_pop));
    cem_elite_frac = cfg.get_double("baselines.cem.elite_frac", cem_elite_frac);
    cem_smoothing = cfg.get_double("baselines.cem.smoothing", cem_smoothing);
    cem_mc = static_cast<int>(cfg.get_int("baselines.cem.mc", cem_mc));
    cem_polish_mult = static_cast<int>(cfg.get_int("baselines.cem.polish_mult", cem_polish_mult));
    cem_polish_maxit = static_cast<int>(cfg.get_int("baselines.cem.polish_maxit", cem_polish_maxit));
    sgd_warm_chains = static_cast<int>(cfg.get_int("baselines.sgd.warm_chains", sgd_warm_chains));
    sgd_warm_iters = static_cast<int>(cfg.get_int("baselines.sgd.warm_iters", sgd_warm_iters));
    sgd_fine_iters = static_cast<int>(cfg.get_int("baselines.sgd.fine_iters", sgd_fine_iters));
    sgd_batch = static_cast<int>(cfg.get_int("baselines.sgd.batch", sgd_batch));
    sgd_rescore_mc = static_cast<int>(cfg.get_int("baselines.sgd.rescore_mc", sgd_rescore_mc));
    sgd_polish_mc = static_cast<int>(cfg.get_int("baselines.sgd.polish_mc", sgd_polish_mc));
    sgd_polish_maxit = static_cast<int>(cfg.get_int("baselines.sgd.polish_maxit", sgd_polish_maxit));
    kde_train = static_cast<int>(cfg.get_int("baselines.kde.train", kde_train));
    kde_mc = static_cast<int>(cfg.get_int("baselines.kde.mc", kde_mc));
    kde_x_bandwidth = cfg.get_double("baselines.kde.x_bandwidth", kde_x_bandwidth);
    kde_de_iters = static_cast<int>(cfg.get_int("baselines.kde.de_iters", kde_de_iters));
    kde_de_pop = static_cast<int>(cfg.get_int("baselines.kde.de_pop", kde_de_pop));
    kde_starts = static_cast<int>(cfg.get_int("baselines.kde.starts", kde_starts));
    kde_polish_maxit = static_cast<int>(cfg.get_int("baselines.kde.polish_maxit", kde_polish_maxit));
    kde_final_mc = static_cast<int>(cfg.get_int("baselines.kde.final_mc", kde_final_mc));
    lhd_restarts = static_cast<int>(cfg.get_int("baselines.lhd_restarts", lhd_restarts));
    fd_step = cfg.get_double("baselines.fd_step", fd_step);
}

std::vector<int> gp_refit_acquisitions(int bo_steps, int refit_every) {
    std::vector<int> out;
    for (int a = refit_every; a <= bo_steps; a += refit_every) out.push_back(a);
    return out;
}

Solution run_gp_bo(const Oracle& oracle, const RiskParams& params, const BaselineConfig& cfg,
                   std::uint64_t seed) {
    validate(params);
    Solution sol;
    OracleLedger& ledger = sol.ledger;
    const BoxBounds box = decision_bounds();

    std::vector<Decision> design =
        maximin_lhd_decisions(cfg.gp_n_init, derive_seed(seed, {hash_label("init")}),
                              cfg.lhd_restarts);
    Eigen::MatrixXd xs(cfg.gp_n_init, 6);
    Eigen::VectorXd ys(cfg.gp_n_init);
    for (int i = 0; i < cfg.gp_n_init; ++i) {
        xs.row(i) = design[static_cast<std::size_t>(i)].x.transpose();
        ys(i) = oracle_evaluate(oracle, design[static_cast<std::size_t>(i)], cfg.gp_mc, params,
                                derive_seed(seed, {hash_label("init_eval"), static_cast<std::uint64_t>(i)}),
                                false, &ledger, "gpbo_init")
                    .total;
    }

    int n_fits = 1;
    GpModel gp = gp_fit(xs, ys, box, derive_seed(seed, {hash_label("gp_fit"), 0}));
    GpHyperParams hyper = gp.hyper();
    const std::vector<int> refit_at = gp_refit_acquisitions(cfg.gp_bo_steps, cfg.gp_refit_every);

    RngStream cand_rng(derive_seed(seed, {hash_label("candidates")}));
    for (int acq = 1; acq <= cfg.gp_bo_steps; ++acq) {
        const double f_best = ys.minCoeff();
        // EI over a random candidate sweep, then a local polish of the winner
        Eigen::VectorXd best_cand;
        double best_ei = -1.0;
        for (int c = 0; c < cfg.gp_candidates; ++c) {
            Vec6 v;
            for (int d = 0; d < 6; ++d) v(d) = cand_rng.uniform(box.lo(d), box.hi(d));
            const Eigen::VectorXd cand = feasible_project(v).x;
            const double ei = gp_expected_improvement(gp, cand, f_best);
            if (ei > best_ei) {
                best_ei = ei;
                best_cand = cand;
            }
        }
        const Objective neg_ei = [&gp, f_best](const Eigen::VectorXd& v) {
            return -gp_expected_improvement(gp, v, f_best);
        };
        QuasiNewtonOptions ei_opts;
        ei_opts.max_iter = 25;
        const GradientFn neg_ei_grad = [&neg_ei](const Eigen::VectorXd& v) {
            return numeric_gradient(neg_ei, v, 1e-5, decision_projector());
        };
        const QuasiNewtonResult ei_polish = bounded_quasi_newton(
            neg_ei, neg_ei_grad, best_cand, box, ei_opts, decision_projector());
        const Eigen::VectorXd chosen = -ei_polish.f > best_ei ? ei_polish.x : best_cand;

        const double y_new =
            oracle_evaluate(oracle, as_decision(chosen), cfg.gp_mc, params,
                            derive_seed(seed, {hash_label("acq_eval"), static_cast<std::uint64_t>(acq)}),
                            false, &ledger, "gpbo_acq")
                .total;
        xs.conservativeResize(xs.rows() + 1, Eigen::NoChange);
        xs.row(xs.rows() - 1) = chosen.transpose();
        ys.conservativeResize(ys.size() + 1);
        ys(ys.size() - 1) = y_new;

        if (std::find(refit_at.begin(), refit_at.end(), acq) != refit_at.end()) {
            gp = gp_fit(xs, ys, box, derive_seed(seed, {hash_label("gp_fit"), static_cast<std::uint64_t>(acq)}));
            hyper = gp.hyper();
            ++n_fits;
        } else {
            // condition on the new observation at the current hyperparameters
            gp = GpModel::build(xs, ys, box, hyper);
        }
    }

    Eigen::Index best_idx;
    ys.minCoeff(&best_idx);
    const Objective pobj = polish_objective(oracle, params, cfg.gp_mc,
                                            derive_seed(seed, {hash_label("polish")}), ledger,
                                            "gpbo_polish");
    const QuasiNewtonResult pol =
        polish(pobj, xs.row(best_idx).transpose(), cfg.gp_polish_maxit, cfg.fd_step);

    sol.x_star = as_decision(pol.x);
    sol.oracle_estimate =
        oracle_evaluate(oracle, sol.x_star, cfg.gp_mc, params,
                        derive_seed(seed, {hash_label("confirm")}), false, &ledger, "gpbo_confirm");
    sol.diagnostics["gp_fits"] = n_fits;
    sol.diagnostics["acquisitions"] = cfg.gp_bo_steps;
    return sol;
}

Solution run_cem_so(const Oracle& oracle, const RiskParams& params, const BaselineConfig& cfg,
                    std::uint64_t seed) {
    validate(params);
    Solution sol;
    OracleLedger& ledger = sol.ledger;
    long long eval_counter = 0;
    const std::uint64_t eval_seed = derive_seed(seed, {hash_label("eval")});
    const Objective objective = [&](const Eigen::VectorXd& v) {
        const std::uint64_t s = derive_seed(eval_seed, {static_cast<std::uint64_t>(eval_counter++)});
        return oracle_evaluate(oracle, as_decision(v), cfg.cem_mc, params, s, false, &ledger,
                               "cemso_eval")
            .total;
    };
    CemOptions copts;
    copts.n_iters = cfg.cem_iters;
    copts.pop_size = cfg.cem_pop;
    copts.elite_frac = cfg.cem_elite_frac;
    copts.smoothing = cfg.cem_smoothing;
    const CemResult cem = cem_optimize(objective, decision_bounds(), copts,
                                       derive_seed(seed, {hash_label("cem")}), decision_projector());

    const Objective pobj = polish_objective(oracle, params, cfg.cem_polish_mc(),
                                            derive_seed(seed, {hash_label("polish")}), ledger,
                                            "cemso_polish");
    const QuasiNewtonResult pol = polish(pobj, cem.mean, cfg.cem_polish_maxit, cfg.fd_step);

    sol.x_star = as_decision(pol.x);
    sol.oracle_estimate = oracle_evaluate(oracle, sol.x_star, cfg.cem_polish_mc(), params,
                                          derive_seed(seed, {hash_label("confirm")}), false,
                                          &ledger, "cemso_confirm");
    sol.diagnostics["cem_evals"] = static_cast<double>(cem.n_evals);
    return sol;
}

Solution run_sgd_cvar(const Oracle& oracle, const RiskParams& params, const BaselineConfig& cfg,
                      std::uint64_t seed) {
    validate(params);
    Solution sol;
    OracleLedger& ledger = sol.ledger;

    const auto batch_objective = [&](const std::string& line) {
        return BatchObjective([&oracle, &ledger, params, &cfg, line](const Eigen::VectorXd& v,
                                                                     std::uint64_t batch_seed) {
            return oracle_evaluate(oracle, as_decision(v), cfg.sgd_batch, params, batch_seed,
                                   false, &ledger, line)
                .total;
        });
    };

    const std::vector<Decision> starts = maximin_lhd_decisions(
        std::max(2, cfg.sgd_warm_chains), derive_seed(seed, {hash_label("starts")}),
        cfg.lhd_restarts);
    AdamOptions warm_opts;
    warm_opts.n_iters = cfg.sgd_warm_iters;

    const std::uint64_t rescore_seed = derive_seed(seed, {hash_label("rescore")});
    Eigen::VectorXd best_warm;
    double best_warm_score = std::numeric_limits<double>::infinity();
    for (int c = 0; c < cfg.sgd_warm_chains; ++c) {
        const AdamResult warm = adam_optimize(
            batch_objective("sgd_warm"), starts[static_cast<std::size_t>(c)].x, warm_opts,
            decision_bounds(), derive_seed(seed, {hash_label("warm"), static_cast<std::uint64_t>(c)}),
            decision_projector());
        const double score = oracle_evaluate(oracle, as_decision(warm.x), cfg.sgd_rescore_mc,
                                             params, rescore_seed, false, &ledger, "sgd_rescore")
                                 .total;
        if (score < best_warm_score) {
            best_warm_score = score;
            best_warm = warm.x;
        }
    }

    AdamOptions fine_opts;
    fine_opts.n_iters = cfg.sgd_fine_iters;
    const AdamResult fine =
        adam_optimize(batch_objective("sgd_fine"), best_warm, fine_opts, decision_bounds(),
                      derive_seed(seed, {hash_label("fine")}), decision_projector());

    const Objective pobj = polish_objective(oracle, params, cfg.sgd_polish_mc,
                                            derive_seed(seed, {hash_label("polish")}), ledger,
                                            "sgd_polish");
    const QuasiNewtonResult pol = polish(pobj, fine.x, cfg.sgd_polish_maxit, cfg.fd_step);

    sol.x_star = as_decision(pol.x);
    sol.oracle_estimate = oracle_evaluate(oracle, sol.x_star, cfg.sgd_rescore_mc, params,
                                          derive_seed(seed, {hash_label("confirm")}), false,
                                          &ledger, "sgd_confirm");
    sol.diagnostics["warm_chains"] = cfg.sgd_warm_chains;
    return sol;
}

Solution run_kde_so(const Oracle& oracle, const RiskParams& params, const BaselineConfig& cfg,
                    std::uint64_t seed) {
    validate(params);
    Solution sol;
    OracleLedger& ledger = sol.ledger;

    const std::vector<Decision> design = maximin_lhd_decisions(
        cfg.kde_train, derive_seed(seed, {hash_label("design")}), cfg.lhd_restarts);
    TrainingSet data;
    data.x = design;
    data.w.resize(cfg.kde_train, 5);
    for (int i = 0; i < cfg.kde_train; ++i) {
        const ScenarioMatrix s = oracle.sample(
            design[static_cast<std::size_t>(i)], 1,
            derive_seed(seed, {hash_label("train_draw"), static_cast<std::uint64_t>(i)}), false);
        ledger.add("kdeso_train", 1);
        data.w.row(i) = s.w.row(0);
    }

    const DecisionKde kde(std::move(data), cfg.kde_x_bandwidth);
    const CostFn cost_fn = [&oracle](const MatX5& w, const Decision& d) {
        return oracle.cost_at(w, d);
    };
    const std::uint64_t surr_seed = derive_seed(seed, {hash_label("surrogate")});
    const Objective surrogate = [&](const Eigen::VectorXd& v) {
        return kde.risk(as_decision(v), cfg.kde_mc, params, cost_fn, surr_seed).total;
    };

    Population init;
    init.members.resize(cfg.kde_de_pop, 6);
    const std::vector<Decision> pop0 = maximin_lhd_decisions(
        cfg.kde_de_pop, derive_seed(seed, {hash_label("de_init")}), cfg.lhd_restarts);
    for (int i = 0; i < cfg.kde_de_pop; ++i)
        init.members.row(i) = pop0[static_cast<std::size_t>(i)].x.transpose();
    DeOptions dopts;
    dopts.n_iters = cfg.kde_de_iters;
    const Population final_pop =
        de_optimize(surrogate, std::move(init), decision_bounds(), dopts,
                    derive_seed(seed, {hash_label("de_run")}), decision_projector());

    // multi-start quasi-Newton on the surrogate from the best DE members
    std::vector<int> order(static_cast<std::size_t>(final_pop.size()));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return final_pop.scores(a) < final_pop.scores(b); });
    Eigen::VectorXd best_x = final_pop.members.row(order[0]).transpose();
    double best_f = std::numeric_limits<double>::infinity();
    const int n_starts = std::min<int>(cfg.kde_starts, final_pop.size());
    for (int s = 0; s < n_starts; ++s) {
        const QuasiNewtonResult r =
            polish(surrogate, final_pop.members.row(order[static_cast<std::size_t>(s)]).transpose(),
                   cfg.kde_polish_maxit, cfg.fd_step);
        if (r.f < best_f) {
            best_f = r.f;
            best_x = r.x;
        }
    }

    sol.x_star = as_decision(best_x);
    // the surrogate winner is reported as-is; one direct evaluation books it
    sol.oracle_estimate = oracle_evaluate(oracle, sol.x_star, cfg.kde_final_mc, params,
                                          derive_seed(seed, {hash_label("confirm")}), false,
                                          &ledger, "kdeso_final");
    sol.diagnostics["de_pop"] = cfg.kde_de_pop;
    return sol;
}

} // namespace acfs
