#include "acfs/acfs.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "acfs/cem.hpp"
#include "acfs/fd_gradient.hpp"
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

double elapsed_s(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool distinct_from(const std::vector<Decision>& chosen, const Decision& cand, double tol) {
    for (const Decision& c : chosen)
        if ((c.x - cand.x).cwiseAbs().maxCoeff() < tol) return false;
    return true;
}

// One oracle outcome per point.
TrainingSet draw_training(const Oracle& oracle, const std::vector<Decision>& points,
                          std::uint64_t seed, OracleLedger& ledger, const std::string& line) {
    TrainingSet data;
    data.x = points;
    data.w.resize(static_cast<int>(points.size()), 5);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const ScenarioMatrix s =
            oracle.sample(points[i], 1, derive_seed(seed, {static_cast<std::uint64_t>(i)}), false);
        ledger.add(line, 1);
        data.w.row(static_cast<int>(i)) = s.w.row(0);
    }
    return data;
}

} // namespace

void AcfsConfig::scale_budgets(double divisor) {
    if (divisor <= 1.0) return;
    const auto scaled = [divisor](int v, int floor_v) {
        return std::max(floor_v, static_cast<int>(std::llround(v / divisor)));
    };
    n_a = scaled(n_a, 2 * grf_min_node + 2);
    n_b = scaled(n_b, k_elites);
    cem_mc = scaled(cem_mc, 4);
    n_c = scaled(n_c, 8);
    n_f = scaled(n_f, 16);
    n_d = scaled(n_d, 16);
    if (n_d % 2 != 0) ++n_d;
    n_seeds = scaled(n_seeds, 2);
    shortlist = std::max(n_seeds, scaled(shortlist, 4));
    local_maxit = scaled(local_maxit, 10);
    de_iters = scaled(de_iters, 5);
    de_pop = scaled(de_pop, 8);
    cem_iters = scaled(cem_iters, 2);
    cem_pop = scaled(cem_pop, 6);
    pool_safety_net = scaled(pool_safety_net, 10);
}

void AcfsConfig::apply_config(const KeyValueConfig& cfg) {
    n_a = static_cast<int>(cfg.get_int("acfs.n_a", n_a));
    n_b = static_cast<int>(cfg.get_int("acfs.n_b", n_b));
    k_elites = static_cast<int>(cfg.get_int("acfs.k_elites", k_elites));
    aug_radius = cfg.get_double("acfs.aug_radius", aug_radius);
    grf_trees = static_cast<int>(cfg.get_int("acfs.grf_trees", grf_trees));
    grf_min_node = static_cast<int>(cfg.get_int("acfs.grf_min_node", grf_min_node));
    de_iters = static_cast<int>(cfg.get_int("acfs.de_iters", de_iters));
    de_pop = static_cast<int>(cfg.get_int("acfs.de_pop", de_pop));
    n_c = static_cast<int>(cfg.get_int("acfs.n_c", n_c));
    n_f = static_cast<int>(cfg.get_int("acfs.n_f", n_f));
    n_d = static_cast<int>(cfg.get_int("acfs.n_d", n_d));
    shortlist = static_cast<int>(cfg.get_int("acfs.shortlist", shortlist));
    n_seeds = static_cast<int>(cfg.get_int("acfs.n_seeds", n_seeds));
    local_maxit = static_cast<int>(cfg.get_int("acfs.local_maxit", local_maxit));
    cem_iters = static_cast<int>(cfg.get_int("acfs.cem_iters", cem_iters));
    cem_pop = static_cast<int>(cfg.get_int("acfs.cem_pop", cem_pop));
    cem_mc = static_cast<int>(cfg.get_int("acfs.cem_mc", cem_mc));
    cem_seed_sd = cfg.get_double("acfs.cem_seed_sd", cem_seed_sd);
    cem_seed_frac = cfg.get_double("acfs.cem_seed_frac", cem_seed_frac);
    elite_ratio = cfg.get_double("acfs.elite_ratio", elite_ratio);
    kde_x_bandwidth = cfg.get_double("acfs.kde_x_bandwidth", kde_x_bandwidth);
    bandwidth_scale = cfg.get_double("acfs.bandwidth_scale", bandwidth_scale);
    lhd_restarts = static_cast<int>(cfg.get_int("acfs.lhd_restarts", lhd_restarts));
    fd_step = cfg.get_double("acfs.fd_step", fd_step);
    no_cem = cfg.get_bool("acfs.no_cem", no_cem);
    no_aug = cfg.get_bool("acfs.no_aug", no_aug);
    no_rerank = cfg.get_bool("acfs.no_rerank", no_rerank);
    no_av = cfg.get_bool("acfs.no_av", no_av);
}

long long phase1_cem_budget(const AcfsConfig& cfg) {
    return cfg.no_cem ? 0
                      : static_cast<long long>(cfg.cem_iters) * cfg.cem_pop * cfg.cem_mc;
}

long long phase1_budget(const AcfsConfig& cfg) { return cfg.n_a + phase1_cem_budget(cfg); }

long long phase2_budget(const AcfsConfig& cfg) { return cfg.no_aug ? 0 : cfg.n_b; }

long long phase3_budget(const AcfsConfig& cfg) {
    return cfg.no_rerank ? 0 : static_cast<long long>(cfg.shortlist) * cfg.n_d;
}

std::vector<int> geometric_allocation(int total, int k_elites, double ratio) {
    if (k_elites < 1 || total < 0) throw std::domain_error("geometric_allocation: bad arguments");
    std::vector<double> weight(static_cast<std::size_t>(k_elites));
    double sum = 0.0;
    for (int k = 0; k < k_elites; ++k) {
        weight[static_cast<std::size_t>(k)] = std::pow(ratio, k);
        sum += weight[static_cast<std::size_t>(k)];
    }
    std::vector<int> alloc(static_cast<std::size_t>(k_elites));
    std::vector<std::pair<double, int>> remainder;
    int assigned = 0;
    for (int k = 0; k < k_elites; ++k) {
        const double exact = total * weight[static_cast<std::size_t>(k)] / sum;
        alloc[static_cast<std::size_t>(k)] = static_cast<int>(std::floor(exact));
        assigned += alloc[static_cast<std::size_t>(k)];
        remainder.emplace_back(exact - std::floor(exact), k);
    }
    std::sort(remainder.begin(), remainder.end(), [](const auto& a, const auto& b) {
        return a.first > b.first || (a.first == b.first && a.second < b.second);
    });
    for (int i = 0; i < total - assigned; ++i)
        ++alloc[static_cast<std::size_t>(remainder[static_cast<std::size_t>(i)].second)];
    return alloc;
}

Phase1Result phase1_explore(const Oracle& oracle, const AcfsConfig& cfg, const RiskParams& params,
                            std::uint64_t seed, OracleLedger& ledger) {
    Phase1Result out;

    // (a) LHD exploration set, one oracle outcome each, forest fit
    const std::vector<Decision> design =
        maximin_lhd_decisions(cfg.n_a, derive_seed(seed, {hash_label("lhd")}), cfg.lhd_restarts);
    out.data = draw_training(oracle, design, derive_seed(seed, {hash_label("draws")}), ledger,
                             "phase1_lhd");
    out.forest = fit_forest(out.data, cfg.grf_trees, cfg.grf_min_node,
                            derive_seed(seed, {hash_label("forest_a")}));

    // (b) CEM warm-start on direct oracle evaluations
    if (!cfg.no_cem) {
        long long eval_counter = 0;
        const std::uint64_t cem_seed = derive_seed(seed, {hash_label("cem")});
        const Objective cem_objective = [&](const Eigen::VectorXd& v) {
            const std::uint64_t s =
                derive_seed(cem_seed, {static_cast<std::uint64_t>(eval_counter++)});
            return oracle_evaluate(oracle, as_decision(v), cfg.cem_mc, params, s, false, &ledger,
                                   "phase1_cem")
                .total;
        };
        CemOptions copts;
        copts.n_iters = cfg.cem_iters;
        copts.pop_size = cfg.cem_pop;
        const CemResult cem = cem_optimize(cem_objective, decision_bounds(), copts, cem_seed,
                                           decision_projector());
        out.has_cem = true;
        out.mu_cem = cem.mean;
    }

    // (c) DE initial population
    Population init;
    init.members.resize(cfg.de_pop, 6);
    const int n_from_cem =
        out.has_cem ? static_cast<int>(std::ceil(cfg.de_pop * cfg.cem_seed_frac)) : 0;
    RngStream basin(derive_seed(seed, {hash_label("de_init")}));
    for (int i = 0; i < n_from_cem; ++i) {
        Vec6 v;
        for (int d = 0; d < 6; ++d) v(d) = out.mu_cem(d) + cfg.cem_seed_sd * basin.normal();
        init.members.row(i) = feasible_project(v).x.transpose();
    }
    const std::vector<Decision> filler = maximin_lhd_decisions(
        cfg.de_pop - n_from_cem, derive_seed(seed, {hash_label("de_lhd")}), cfg.lhd_restarts);
    for (int i = n_from_cem; i < cfg.de_pop; ++i)
        init.members.row(i) = filler[static_cast<std::size_t>(i - n_from_cem)].x.transpose();

    // (d) DE on the KDE surrogate
    const DecisionKde kde(out.data, cfg.kde_x_bandwidth, cfg.bandwidth_scale);
    const CostFn cost_fn = [&oracle](const MatX5& w, const Decision& d) {
        return oracle.cost_at(w, d);
    };
    const std::uint64_t kde_seed = derive_seed(seed, {hash_label("de_kde")});
    const Objective de_objective = [&](const Eigen::VectorXd& v) {
        return kde.risk(as_decision(v), cfg.n_c, params, cost_fn, kde_seed).total;
    };
    DeOptions dopts;
    dopts.n_iters = cfg.de_iters;
    const Population final_pop =
        de_optimize(de_objective, std::move(init), decision_bounds(), dopts,
                    derive_seed(seed, {hash_label("de_run")}), decision_projector());

    // (e) re-rank the final population with the forest surrogate
    const std::uint64_t rerank_seed = derive_seed(seed, {hash_label("rescore")});
    std::vector<double> forest_score(static_cast<std::size_t>(final_pop.size()));
    for (int i = 0; i < final_pop.size(); ++i)
        forest_score[static_cast<std::size_t>(i)] =
            surrogate_risk(out.forest, out.data, as_decision(final_pop.members.row(i).transpose()),
                           cfg.n_f, params, cost_fn, rerank_seed, cfg.bandwidth_scale)
                .total;
    std::vector<int> order(static_cast<std::size_t>(final_pop.size()));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return forest_score[static_cast<std::size_t>(a)] <
                                         forest_score[static_cast<std::size_t>(b)]; });
    for (int idx : order) {
        out.de_members.push_back(as_decision(final_pop.members.row(idx).transpose()));
        out.de_scores.push_back(forest_score[static_cast<std::size_t>(idx)]);
    }
    std::vector<bool> used(static_cast<std::size_t>(final_pop.size()), false);
    for (int idx : order) {
        if (static_cast<int>(out.elites.size()) >= cfg.k_elites) break;
        const Decision cand = as_decision(final_pop.members.row(idx).transpose());
        if (distinct_from(out.elites, cand, 1e-9)) {
            out.elites.push_back(cand);
            used[static_cast<std::size_t>(idx)] = true;
        }
    }
    // a fully collapsed population still yields K index-distinct elites
    for (int idx : order) {
        if (static_cast<int>(out.elites.size()) >= cfg.k_elites) break;
        if (!used[static_cast<std::size_t>(idx)]) {
            out.elites.push_back(as_decision(final_pop.members.row(idx).transpose()));
            used[static_cast<std::size_t>(idx)] = true;
        }
    }
    return out;
}

Phase2Result phase2_augment(const Phase1Result& p1, const Oracle& oracle, const AcfsConfig& cfg,
                            std::uint64_t seed, OracleLedger& ledger) {
    if (p1.elites.empty()) throw std::domain_error("phase2_augment: no elites");
    Phase2Result out;
    if (cfg.no_aug) {
        out.data = p1.data;
        out.forest = p1.forest;
        return out;
    }
    const std::vector<int> alloc =
        geometric_allocation(cfg.n_b, static_cast<int>(p1.elites.size()), cfg.elite_ratio);
    std::vector<Decision> points;
    points.reserve(static_cast<std::size_t>(cfg.n_b));
    RngStream perturb(derive_seed(seed, {hash_label("aug")}));
    for (std::size_t k = 0; k < p1.elites.size(); ++k) {
        for (int i = 0; i < alloc[k]; ++i) {
            Vec6 v;
            for (int d = 0; d < 6; ++d)
                v(d) = p1.elites[k].x(d) + cfg.aug_radius * perturb.normal();
            points.push_back(feasible_project(v));
        }
    }
    const TrainingSet extra = draw_training(
        oracle, points, derive_seed(seed, {hash_label("aug_draws")}), ledger, "phase2_aug");
    out.data = p1.data;
    out.data.append(extra);
    out.forest = fit_forest(out.data, cfg.grf_trees, cfg.grf_min_node,
                            derive_seed(seed, {hash_label("forest_ab")}));
    return out;
}

std::vector<Decision> build_candidate_pool(const Phase1Result& p1, const AcfsConfig& cfg,
                                           std::uint64_t seed) {
    std::vector<Decision> pool;
    const auto push = [&pool](const Decision& d) {
        if (distinct_from(pool, d, 1e-9)) pool.push_back(d);
    };
    for (const Decision& e : p1.elites) push(e);
    RngStream rng(derive_seed(seed, {hash_label("pool")}));
    for (const Decision& e : p1.elites) {
        for (int i = 0; i < cfg.pool_perturb_per_elite; ++i) {
            Vec6 v;
            for (int d = 0; d < 6; ++d) v(d) = e.x(d) + cfg.aug_radius * rng.normal();
            push(feasible_project(v));
        }
    }
    const int n_de = std::min<int>(cfg.pool_de_members, static_cast<int>(p1.de_members.size()));
    for (int i = 0; i < n_de; ++i) push(p1.de_members[static_cast<std::size_t>(i)]);
    for (const Decision& d : maximin_lhd_decisions(
             cfg.pool_safety_net, derive_seed(seed, {hash_label("pool_lhd")}), cfg.lhd_restarts))
        push(d);
    if (p1.has_cem) {
        for (int i = 0; i < cfg.pool_cem_draws; ++i) {
            Vec6 v;
            for (int d = 0; d < 6; ++d) v(d) = p1.mu_cem(d) + cfg.cem_seed_sd * rng.normal();
            push(feasible_project(v));
        }
    }
    return pool;
}

std::vector<Decision> phase3_rerank(const std::vector<Decision>& pool,
                                    const SurrogateScorer& stage1_score, const Oracle& oracle,
                                    const AcfsConfig& cfg, const RiskParams& params,
                                    std::uint64_t seed, OracleLedger& ledger) {
    if (pool.empty()) throw std::domain_error("phase3_rerank: empty pool");
    std::vector<std::pair<double, int>> scored;
    scored.reserve(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i)
        scored.emplace_back(stage1_score(pool[i]), static_cast<int>(i));
    std::sort(scored.begin(), scored.end());
    const int keep1 = std::min<int>(cfg.shortlist, static_cast<int>(scored.size()));

    if (cfg.no_rerank) {
        std::vector<Decision> out;
        const int keep = std::min(cfg.n_seeds, keep1);
        for (int i = 0; i < keep; ++i)
            out.push_back(pool[static_cast<std::size_t>(scored[static_cast<std::size_t>(i)].second)]);
        return out;
    }

    std::vector<std::pair<double, int>> rescored;
    rescored.reserve(static_cast<std::size_t>(keep1));
    for (int i = 0; i < keep1; ++i) {
        const int idx = scored[static_cast<std::size_t>(i)].second;
        const std::uint64_t s = derive_seed(seed, {hash_label("stage2"), static_cast<std::uint64_t>(i)});
        const double j = oracle_evaluate(oracle, pool[static_cast<std::size_t>(idx)], cfg.n_d,
                                         params, s, !cfg.no_av, &ledger, "phase3_stage2")
                             .total;
        rescored.emplace_back(j, idx);
    }
    std::sort(rescored.begin(), rescored.end());
    std::vector<Decision> out;
    const int keep2 = std::min<int>(cfg.n_seeds, static_cast<int>(rescored.size()));
    for (int i = 0; i < keep2; ++i)
        out.push_back(pool[static_cast<std::size_t>(rescored[static_cast<std::size_t>(i)].second)]);
    return out;
}

Solution phase4_refine(const std::vector<Decision>& seeds, const Oracle& oracle,
                       const AcfsConfig& cfg, const RiskParams& params, std::uint64_t seed,
                       OracleLedger& ledger) {
    if (seeds.empty()) throw std::domain_error("phase4_refine: no seeds");
    const CostFn cost_fn = [&oracle](const MatX5& w, const Decision& d) {
        return oracle.cost_at(w, d);
    };

    struct StartResult {
        Decision x;
        bool ok = false;
        std::string error;
    };
    std::vector<StartResult> results(seeds.size());

    for (std::size_t s = 0; s < seeds.size(); ++s) {
        const std::uint64_t start_seed = derive_seed(seed, {hash_label("start"), s});
        CrnScenarioCache cache(oracle);
        const ScenarioMatrix* current = nullptr;
        const IterateCallback on_iterate = [&](const Eigen::VectorXd& v, int iter) {
            cache.invalidate();
            current = &cache.get(as_decision(v), cfg.n_d,
                                 derive_seed(start_seed, {static_cast<std::uint64_t>(iter)}),
                                 !cfg.no_av, &ledger, "phase4_refine");
        };
        const Objective fn = [&](const Eigen::VectorXd& v) {
            return spectral_risk(cost_fn(current->w, as_decision(v)), params).total;
        };
        const GradientFn gr = [&](const Eigen::VectorXd& v) {
            return Eigen::VectorXd(
                fd_gradient_crn(cost_fn, params, as_decision(v), *current, cfg.fd_step));
        };
        QuasiNewtonOptions qopts;
        qopts.max_iter = cfg.local_maxit;
        try {
            const QuasiNewtonResult r =
                bounded_quasi_newton(fn, gr, seeds[s].x, decision_bounds(), qopts,
                                     decision_projector(), on_iterate);
            results[s].x = as_decision(r.x);
            results[s].ok = true;
        } catch (const std::exception& e) {
            results[s].error = e.what();
        }
    }

    // confirmation at a common seed decouples the winner from per-start seeds
    const std::uint64_t confirm_seed = derive_seed(seed, {hash_label("confirm")});
    Solution sol;
    bool found = false;
    int n_failed = 0;
    for (const StartResult& r : results) {
        if (!r.ok) {
            ++n_failed;
            continue;
        }
        const RiskEstimate est = oracle_evaluate(oracle, r.x, cfg.n_d, params, confirm_seed,
                                                 !cfg.no_av, &ledger, "phase4_confirm");
        if (!found || est.total < sol.oracle_estimate.total) {
            found = true;
            sol.x_star = r.x;
            sol.oracle_estimate = est;
        }
    }
    if (!found) {
        std::string detail;
        for (const StartResult& r : results)
            if (!r.ok && detail.size() < 400) detail += r.error + "; ";
        throw std::runtime_error("phase4_refine: all " + std::to_string(n_failed) +
                                 " starts failed: " + detail);
    }
    sol.diagnostics["phase4_failed_starts"] = n_failed;
    return sol;
}

Solution run_acfs(const Oracle& oracle, const AcfsConfig& cfg, const RiskParams& params,
                  std::uint64_t master_seed) {
    validate(params);
    OracleLedger ledger;
    std::map<std::string, double> timings;

    auto t0 = std::chrono::steady_clock::now();
    const Phase1Result p1 =
        phase1_explore(oracle, cfg, params, derive_seed(master_seed, {hash_label("phase1")}), ledger);
    timings["phase1"] = elapsed_s(t0);

    t0 = std::chrono::steady_clock::now();
    const Phase2Result p2 =
        phase2_augment(p1, oracle, cfg, derive_seed(master_seed, {hash_label("phase2")}), ledger);
    timings["phase2"] = elapsed_s(t0);

    t0 = std::chrono::steady_clock::now();
    const std::vector<Decision> pool =
        build_candidate_pool(p1, cfg, derive_seed(master_seed, {hash_label("pool")}));
    const CostFn cost_fn = [&oracle](const MatX5& w, const Decision& d) {
        return oracle.cost_at(w, d);
    };
    const std::uint64_t stage1_seed = derive_seed(master_seed, {hash_label("stage1")});
    const SurrogateScorer stage1 = [&](const Decision& d) {
        return surrogate_risk(p2.forest, p2.data, d, cfg.n_f, params, cost_fn, stage1_seed,
                              cfg.bandwidth_scale)
            .total;
    };
    const std::vector<Decision> seeds = phase3_rerank(
        pool, stage1, oracle, cfg, params, derive_seed(master_seed, {hash_label("phase3")}), ledger);
    timings["phase3"] = elapsed_s(t0);

    t0 = std::chrono::steady_clock::now();
    Solution sol = phase4_refine(seeds, oracle, cfg, params,
                                 derive_seed(master_seed, {hash_label("phase4")}), ledger);
    timings["phase4"] = elapsed_s(t0);

    sol.ledger = ledger;
    sol.phase_seconds = timings;
    sol.diagnostics["pool_size"] = static_cast<double>(pool.size());
    return sol;
}

} // namespace acfs
