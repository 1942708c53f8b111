#include "acfs/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace acfs {

namespace {

constexpr std::uint64_t kSummarySeed = 0x53554d4d41525aULL;

std::uint64_t lambda_bits(double lambda) {
    std::uint64_t bits;
    std::memcpy(&bits, &lambda, sizeof(bits));
    return bits;
}

std::string sanitize(std::string s) {
    for (char& c : s)
        if (c == '\t' || c == '\n' || c == '\r') c = ' ';
    if (s.size() > 160) s.resize(160);
    return s;
}

struct Task {
    DgpKind dgp;
    double lambda;
    std::string method;
    int rep;
};

} // namespace

std::string method_display(const std::string& label) {
    static const std::map<std::string, std::string> names{
        {"acfs", "ACFS"},          {"gpbo", "GP-BO"},
        {"cemso", "CEM-SO"},       {"sgdcvar", "SGD-CVaR"},
        {"kdeso", "KDE-SO"},       {"acfs_full", "ACFS-Full"},
        {"acfs_nocem", "ACFS-NoCEM"}, {"acfs_noaug", "ACFS-NoAug"},
        {"acfs_norerank", "ACFS-NoRerank"}, {"acfs_noav", "ACFS-NoAV"}};
    const auto it = names.find(label);
    return it == names.end() ? label : it->second;
}

bool is_known_label(const std::string& label) {
    return std::find(kMethodLabels.begin(), kMethodLabels.end(), label) != kMethodLabels.end() ||
           std::find(kAblationLabels.begin(), kAblationLabels.end(), label) !=
               kAblationLabels.end();
}

void ExperimentPlan::validate_plan() const {
    if (n_replications < 1) throw std::domain_error("plan: n_replications must be >= 1");
    if (dgps.empty()) throw std::domain_error("plan: at least one DGP");
    if (methods.empty()) throw std::domain_error("plan: at least one method");
    for (const std::string& m : methods)
        if (!is_known_label(m)) throw std::domain_error("plan: unknown method label: " + m);
    for (double l : lambdas)
        if (l < 0.0) throw std::domain_error("plan: lambda must be nonnegative");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("plan: alpha must lie in (0,1)");
    if (oracle_eval_draws < 2) throw std::domain_error("plan: oracle_eval_draws must be >= 2");
}

AcfsConfig ExperimentPlan::effective_acfs() const {
    AcfsConfig cfg = acfs;
    cfg.scale_budgets(scale_divisor);
    return cfg;
}

BaselineConfig ExperimentPlan::effective_baselines() const {
    BaselineConfig cfg = baselines;
    cfg.scale_budgets(scale_divisor);
    return cfg;
}

ExperimentPlan ExperimentPlan::from_config(const KeyValueConfig& cfg) {
    ExperimentPlan plan;
    if (cfg.has("plan.dgps")) {
        plan.dgps.clear();
        for (const std::string& d : split_csv(cfg.get_string("plan.dgps", "")))
            plan.dgps.push_back(dgp_kind_from_string(d));
    }
    if (cfg.has("plan.lambdas")) {
        plan.lambdas.clear();
        for (const std::string& l : split_csv(cfg.get_string("plan.lambdas", "")))
            plan.lambdas.push_back(std::stod(l));
    }
    if (cfg.has("plan.methods")) plan.methods = split_csv(cfg.get_string("plan.methods", ""));
    plan.alpha = cfg.get_double("plan.alpha", plan.alpha);
    plan.n_replications = static_cast<int>(cfg.get_int("plan.reps", plan.n_replications));
    plan.master_seed = static_cast<std::uint64_t>(
        cfg.get_int("plan.master_seed", static_cast<long long>(plan.master_seed)));
    plan.oracle_eval_draws =
        static_cast<int>(cfg.get_int("plan.oracle_eval_draws", plan.oracle_eval_draws));
    plan.bootstrap_reps = static_cast<int>(cfg.get_int("plan.bootstrap_reps", plan.bootstrap_reps));
    plan.scale_divisor = cfg.get_double("plan.scale_divisor", plan.scale_divisor);
    plan.workers = static_cast<int>(cfg.get_int("plan.workers", plan.workers));
    plan.record_timing = cfg.get_bool("plan.record_timing", plan.record_timing);
    plan.ablation_reps = static_cast<int>(cfg.get_int("plan.ablation_reps", plan.ablation_reps));
    plan.sensitivity_reps =
        static_cast<int>(cfg.get_int("plan.sensitivity_reps", plan.sensitivity_reps));
    plan.acfs.apply_config(cfg);
    plan.baselines.apply_config(cfg);
    plan.dgp_constants = cfg;
    return plan;
}

Solution run_labeled_method(const std::string& label, const Oracle& oracle,
                            const RiskParams& params, AcfsConfig acfs_cfg,
                            const BaselineConfig& baseline_cfg, std::uint64_t seed) {
    if (label == "gpbo") return run_gp_bo(oracle, params, baseline_cfg, seed);
    if (label == "cemso") return run_cem_so(oracle, params, baseline_cfg, seed);
    if (label == "sgdcvar") return run_sgd_cvar(oracle, params, baseline_cfg, seed);
    if (label == "kdeso") return run_kde_so(oracle, params, baseline_cfg, seed);
    if (label == "acfs" || label == "acfs_full") return run_acfs(oracle, acfs_cfg, params, seed);
    if (label == "acfs_nocem") {
        acfs_cfg.no_cem = true;
        return run_acfs(oracle, acfs_cfg, params, seed);
    }
    if (label == "acfs_noaug") {
        acfs_cfg.no_aug = true;
        return run_acfs(oracle, acfs_cfg, params, seed);
    }
    if (label == "acfs_norerank") {
        acfs_cfg.no_rerank = true;
        return run_acfs(oracle, acfs_cfg, params, seed);
    }
    if (label == "acfs_noav") {
        acfs_cfg.no_av = true;
        return run_acfs(oracle, acfs_cfg, params, seed);
    }
    throw std::domain_error("unknown method label: " + label);
}

std::uint64_t run_seed(std::uint64_t master, const std::string& dgp, double lambda,
                       const std::string& method, int rep) {
    return derive_seed(master, {hash_label("run"), hash_label(dgp), lambda_bits(lambda),
                                hash_label(method), static_cast<std::uint64_t>(rep)});
}

std::uint64_t eval_seed(std::uint64_t master, const std::string& dgp, double lambda, int rep) {
    // no method label: evaluation draws are shared across methods so paired
    // per-replication differences are well-defined
    return derive_seed(master, {hash_label("eval"), hash_label(dgp), lambda_bits(lambda),
                                static_cast<std::uint64_t>(rep)});
}

namespace {

ReplicationRow execute_task(const Task& task, const ExperimentPlan& plan) {
    const std::string dgp_name = to_string(task.dgp);
    ReplicationRow row;
    row.dgp = dgp_name;
    row.lambda = task.lambda;
    row.method = task.method;
    row.rep = task.rep;
    row.seed = run_seed(plan.master_seed, dgp_name, task.lambda, task.method, task.rep);

    const RiskParams params{task.lambda, plan.alpha};
    DgpSpec spec = DgpSpec::make(task.dgp, params);
    spec.apply_config(plan.dgp_constants);
    const DgpOracle oracle(spec);

    const auto t0 = std::chrono::steady_clock::now();
    try {
        const Solution sol = run_labeled_method(task.method, oracle, params,
                                                plan.effective_acfs(), plan.effective_baselines(),
                                                row.seed);
        const RiskEstimate final_est = oracle_evaluate(
            oracle, sol.x_star, plan.oracle_eval_draws, params,
            eval_seed(plan.master_seed, dgp_name, task.lambda, task.rep), false);
        row.x = sol.x_star.x;
        row.oracle_j = final_est.total;
        row.oracle_ec = final_est.expected_cost;
        row.oracle_cvar = final_est.cvar;
        row.oracle_calls = sol.ledger.total();
        row.status = "ok";
    } catch (const std::exception& e) {
        row.oracle_j = std::nan("");
        row.oracle_ec = std::nan("");
        row.oracle_cvar = std::nan("");
        row.status = "failed: " + sanitize(e.what());
    }
    row.seconds = plan.record_timing
                      ? std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()
                      : 0.0;
    return row;
}

} // namespace

std::string run_experiment(const ExperimentPlan& plan, const std::string& out_dir) {
    plan.validate_plan();
    std::filesystem::create_directories(out_dir);
    const std::string path = out_dir + "/results.tsv";

    std::set<std::string> existing;
    for (const ReplicationRow& row : read_results(path)) existing.insert(row.key());

    std::vector<Task> tasks;
    for (DgpKind dgp : plan.dgps)
        for (double lambda : plan.lambdas)
            for (const std::string& method : plan.methods)
                for (int rep = 0; rep < plan.n_replications; ++rep) {
                    ReplicationRow probe;
                    probe.dgp = to_string(dgp);
                    probe.lambda = lambda;
                    probe.method = method;
                    probe.rep = rep;
                    if (existing.count(probe.key())) continue;
                    tasks.push_back({dgp, lambda, method, rep});
                }

    ResultsWriter writer(path, static_cast<int>(tasks.size()));
    std::mutex writer_mutex;
    std::atomic<std::size_t> next{0};
    const int n_workers = std::max(1, std::min<int>(plan.workers, static_cast<int>(tasks.size())));

    const auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) break;
            ReplicationRow row = execute_task(tasks[i], plan);
            std::lock_guard<std::mutex> lock(writer_mutex);
            writer.submit(static_cast<int>(i), std::move(row));
        }
    };
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_workers));
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    return path;
}

// ---------------------------------------------------------------------------
// Summaries
// ---------------------------------------------------------------------------

std::vector<BlockSummary> summarize_rows(const std::vector<ReplicationRow>& rows,
                                         const std::string& reference, int bootstrap_reps) {
    // group by (dgp, lambda), preserving first-appearance order
    std::vector<std::pair<std::string, double>> block_keys;
    std::map<std::string, std::vector<const ReplicationRow*>> blocks;
    const auto block_id = [](const std::string& dgp, double lambda) {
        std::ostringstream os;
        os << dgp << '@' << lambda;
        return os.str();
    };
    for (const ReplicationRow& r : rows) {
        const std::string id = block_id(r.dgp, r.lambda);
        if (!blocks.count(id)) block_keys.emplace_back(r.dgp, r.lambda);
        blocks[id].push_back(&r);
    }

    std::vector<BlockSummary> out;
    for (const auto& [dgp, lambda] : block_keys) {
        const auto& block = blocks[block_id(dgp, lambda)];
        BlockSummary bs;
        bs.dgp = dgp;
        bs.lambda = lambda;
        bs.reference = reference;

        std::vector<std::string> method_order;
        std::map<std::string, std::map<int, const ReplicationRow*>> per_method;
        for (const ReplicationRow* r : block) {
            if (!per_method.count(r->method)) method_order.push_back(r->method);
            per_method[r->method][r->rep] = r;
        }

        double ref_median = std::nan("");
        std::vector<double> ref_j;
        for (const std::string& m : method_order) {
            std::vector<double> j, ec;
            for (const auto& [rep, r] : per_method[m]) {
                if (!r->ok()) continue;
                j.push_back(r->oracle_j);
                ec.push_back(r->oracle_ec);
            }
            if (j.empty()) continue;
            MethodSummary ms;
            ms.method = m;
            ms.n = static_cast<int>(j.size());
            ms.j = summarize(j);
            ms.ec_median = median_of(ec);
            bs.methods.push_back(ms);
            if (m == reference) {
                ref_median = ms.j.median;
                ref_j = j;
            }
        }
        for (MethodSummary& ms : bs.methods)
            ms.gap_pct = std::isnan(ref_median)
                             ? std::nan("")
                             : 100.0 * (ms.j.median - ref_median) / ref_median;

        if (!std::isnan(ref_median)) {
            std::vector<double> raw_p;
            for (const std::string& m : method_order) {
                if (m == reference) continue;
                PairedComparison pc;
                pc.competitor = m;
                std::vector<double> diffs;
                for (const auto& [rep, r] : per_method[m]) {
                    if (!r->ok()) continue;
                    const auto ref_it = per_method[reference].find(rep);
                    if (ref_it == per_method[reference].end() || !ref_it->second->ok()) continue;
                    diffs.push_back(ref_it->second->oracle_j - r->oracle_j);
                }
                pc.n_pairs = static_cast<int>(diffs.size());
                if (!diffs.empty()) {
                    const WilcoxonResult w = wilcoxon_signed_rank(diffs, Alternative::Less);
                    pc.p_raw = w.p;
                    const RankBiserialResult rb = rank_biserial(diffs);
                    pc.r_rb = rb.r;
                    pc.win_pct = 100.0 * win_rate(diffs);
                    pc.med_diff = median_of(diffs);
                    RngStream rng(derive_seed(kSummarySeed, {hash_label(dgp), lambda_bits(lambda),
                                                             hash_label(m)}));
                    const auto [lo, hi] =
                        bootstrap_ci(diffs, BootstrapStat::Median, bootstrap_reps, 0.95, rng);
                    pc.ci_lo = lo;
                    pc.ci_hi = hi;
                }
                raw_p.push_back(pc.p_raw);
                bs.comparisons.push_back(pc);
            }
            const std::vector<double> adj = holm_adjust(raw_p);
            for (std::size_t i = 0; i < adj.size(); ++i) bs.comparisons[i].p_holm = adj[i];
        }
        out.push_back(std::move(bs));
    }
    return out;
}

namespace {

void write_summary_files(const std::vector<BlockSummary>& summary, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::ofstream txt(out_dir + "/summary.txt");
    std::ofstream tsv(out_dir + "/summary.tsv");
    tsv << "dgp\tlambda\tmethod\tn\tJ_med\tJ_sd\tJ_q25\tJ_q75\tEC_med\tgap_pct\n";
    std::ofstream wtsv(out_dir + "/wilcoxon.tsv");
    wtsv << "dgp\tlambda\tcompetitor\tn_pairs\tmed_diff\tci_lo\tci_hi\tp_raw\tp_holm\tr_rb\twin_pct\n";

    for (const BlockSummary& bs : summary) {
        txt << "== " << bs.dgp << "  lambda=" << bs.lambda << " ==\n";
        char line[256];
        std::snprintf(line, sizeof(line), "%-14s %5s %14s %14s %14s %14s %14s %9s\n", "method", "n",
                      "J_med", "J_sd", "J_q25", "J_q75", "EC_med", "Gap%");
        txt << line;
        for (const MethodSummary& ms : bs.methods) {
            std::snprintf(line, sizeof(line),
                          "%-14s %5d %14.1f %14.1f %14.1f %14.1f %14.1f %9.2f\n",
                          method_display(ms.method).c_str(), ms.n, ms.j.median, ms.j.sd, ms.j.q25,
                          ms.j.q75, ms.ec_median, ms.gap_pct);
            txt << line;
            tsv << bs.dgp << '\t' << bs.lambda << '\t' << ms.method << '\t' << ms.n << '\t'
                << ms.j.median << '\t' << ms.j.sd << '\t' << ms.j.q25 << '\t' << ms.j.q75 << '\t'
                << ms.ec_median << '\t' << ms.gap_pct << '\n';
        }
        if (!bs.comparisons.empty()) {
            std::snprintf(line, sizeof(line), "  paired vs %s (H1: reference < competitor)\n",
                          method_display(bs.reference).c_str());
            txt << line;
            std::snprintf(line, sizeof(line), "  %-14s %5s %14s %26s %10s %8s %7s\n", "competitor",
                          "n", "med_diff", "95% CI", "p_holm", "r_rb", "win%");
            txt << line;
            for (const PairedComparison& pc : bs.comparisons) {
                char ci[64];
                std::snprintf(ci, sizeof(ci), "[%.1f; %.1f]", pc.ci_lo, pc.ci_hi);
                std::snprintf(line, sizeof(line), "  %-14s %5d %14.1f %26s %10.4g %8.3f %6.1f%%\n",
                              method_display(pc.competitor).c_str(), pc.n_pairs, pc.med_diff, ci,
                              pc.p_holm, pc.r_rb, pc.win_pct);
                txt << line;
                wtsv << bs.dgp << '\t' << bs.lambda << '\t' << pc.competitor << '\t' << pc.n_pairs
                     << '\t' << pc.med_diff << '\t' << pc.ci_lo << '\t' << pc.ci_hi << '\t'
                     << pc.p_raw << '\t' << pc.p_holm << '\t' << pc.r_rb << '\t' << pc.win_pct
                     << '\n';
            }
        }
        txt << '\n';
    }
}

} // namespace

std::vector<BlockSummary> summarize_experiment(const std::string& results_path,
                                               const std::string& out_dir,
                                               const std::string& reference, int bootstrap_reps) {
    const std::vector<ReplicationRow> rows = read_results(results_path);
    if (rows.empty()) throw std::runtime_error("summarize: no rows in " + results_path);
    std::vector<BlockSummary> summary = summarize_rows(rows, reference, bootstrap_reps);
    write_summary_files(summary, out_dir);
    return summary;
}

// ---------------------------------------------------------------------------
// Ablation
// ---------------------------------------------------------------------------

std::vector<AblationRow> ablation_table(const std::vector<ReplicationRow>& rows) {
    const std::vector<BlockSummary> blocks = summarize_rows(rows, "acfs_full", 400);
    std::vector<AblationRow> out;
    for (const BlockSummary& bs : blocks) {
        double sd_full = std::nan("");
        for (const MethodSummary& ms : bs.methods)
            if (ms.method == "acfs_full") sd_full = ms.j.sd;
        for (const MethodSummary& ms : bs.methods) {
            AblationRow ar;
            ar.dgp = bs.dgp;
            ar.variant = ms.method;
            ar.n = ms.n;
            ar.j_med = ms.j.median;
            ar.j_sd = ms.j.sd;
            ar.gap_pct = ms.gap_pct;
            ar.sigma_ratio = ms.j.sd / sd_full;
            ar.p_holm = 1.0;
            out.push_back(ar);
        }
        // two-sided Full-vs-variant tests, Holm within the DGP block
        std::vector<double> raw;
        std::vector<std::size_t> idx;
        for (std::size_t i = out.size() - bs.methods.size(); i < out.size(); ++i) {
            if (out[i].variant == "acfs_full") continue;
            std::map<int, double> full_j, var_j;
            for (const ReplicationRow& r : rows) {
                if (!r.ok() || r.dgp != bs.dgp) continue;
                if (r.method == "acfs_full") full_j[r.rep] = r.oracle_j;
                if (r.method == out[i].variant) var_j[r.rep] = r.oracle_j;
            }
            std::vector<double> diffs;
            for (const auto& [rep, j] : full_j)
                if (var_j.count(rep)) diffs.push_back(j - var_j[rep]);
            raw.push_back(diffs.empty() ? 1.0
                                        : wilcoxon_signed_rank(diffs, Alternative::TwoSided).p);
            idx.push_back(i);
        }
        const std::vector<double> adj = holm_adjust(raw);
        for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]].p_holm = adj[k];
    }
    return out;
}

std::vector<AblationRow> run_ablation(const ExperimentPlan& plan, const std::string& out_dir) {
    ExperimentPlan ablation = plan;
    ablation.methods = kAblationLabels;
    ablation.lambdas = {0.70};
    ablation.n_replications = std::max(
        3, static_cast<int>(std::llround(plan.ablation_reps / std::max(1.0, plan.scale_divisor))));
    const std::string path = run_experiment(ablation, out_dir + "/ablation");
    const std::vector<AblationRow> table = ablation_table(read_results(path));

    std::ofstream txt(out_dir + "/ablation/ablation.txt");
    std::ofstream tsv(out_dir + "/ablation/ablation.tsv");
    tsv << "dgp\tvariant\tn\tJ_med\tJ_sd\tgap_pct\tsigma_ratio\tp_holm\n";
    std::string last_dgp;
    for (const AblationRow& ar : table) {
        if (ar.dgp != last_dgp) {
            txt << "== " << ar.dgp << " (lambda=0.70) ==\n";
            last_dgp = ar.dgp;
        }
        char line[200];
        std::snprintf(line, sizeof(line), "%-16s n=%-4d J_med=%12.1f J_sd=%12.1f Gap%%=%7.2f "
                                          "sigma-ratio=%6.3f p_holm=%.3g\n",
                      method_display(ar.variant).c_str(), ar.n, ar.j_med, ar.j_sd, ar.gap_pct,
                      ar.sigma_ratio, ar.p_holm);
        txt << line;
        tsv << ar.dgp << '\t' << ar.variant << '\t' << ar.n << '\t' << ar.j_med << '\t' << ar.j_sd
            << '\t' << ar.gap_pct << '\t' << ar.sigma_ratio << '\t' << ar.p_holm << '\n';
    }
    return table;
}

// ---------------------------------------------------------------------------
// Sensitivity
// ---------------------------------------------------------------------------

std::vector<SensitivityGridEntry> sensitivity_grid() {
    return {{"n_a", {800, 1200, 1600}, 1200},
            {"n_f", {400, 800, 1200}, 800},
            {"k_elites", {2, 4, 6}, 4},
            {"n_d", {300, 450, 600}, 450}};
}

namespace {

void set_grid_value(AcfsConfig& cfg, const std::string& parameter, double value) {
    const int v = static_cast<int>(std::llround(value));
    if (parameter == "n_a") cfg.n_a = v;
    else if (parameter == "n_f") cfg.n_f = v;
    else if (parameter == "k_elites") cfg.k_elites = v;
    else if (parameter == "n_d") cfg.n_d = v;
    else throw std::domain_error("sensitivity: unknown parameter " + parameter);
}

} // namespace

std::vector<SensitivityPoint> run_sensitivity(const ExperimentPlan& plan,
                                              const std::string& out_dir) {
    const std::string dir = out_dir + "/sensitivity";
    std::filesystem::create_directories(dir);
    const std::string path = dir + "/results.tsv";
    std::set<std::string> existing;
    for (const ReplicationRow& row : read_results(path)) existing.insert(row.key());

    const DgpKind dgp = plan.dgps.front();
    const double lambda = 0.70;
    const RiskParams params{lambda, plan.alpha};
    const int reps = std::max(
        3, static_cast<int>(std::llround(plan.sensitivity_reps / std::max(1.0, plan.scale_divisor))));

    struct PointTask {
        std::string label;
        std::string parameter;
        double value;
        int rep;
    };
    std::vector<PointTask> tasks;
    for (const SensitivityGridEntry& entry : sensitivity_grid())
        for (double value : entry.values)
            for (int rep = 0; rep < reps; ++rep) {
                std::ostringstream label;
                label << "acfs[" << entry.parameter << '=' << value << ']';
                ReplicationRow probe;
                probe.dgp = to_string(dgp);
                probe.lambda = lambda;
                probe.method = label.str();
                probe.rep = rep;
                if (existing.count(probe.key())) continue;
                tasks.push_back({label.str(), entry.parameter, value, rep});
            }

    ResultsWriter writer(path, static_cast<int>(tasks.size()));
    std::mutex writer_mutex;
    std::atomic<std::size_t> next{0};
    const int n_workers = std::max(1, std::min<int>(plan.workers, static_cast<int>(tasks.size())));
    const auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) break;
            const PointTask& t = tasks[i];
            ReplicationRow row;
            row.dgp = to_string(dgp);
            row.lambda = lambda;
            row.method = t.label;
            row.rep = t.rep;
            row.seed = run_seed(plan.master_seed, row.dgp, lambda, t.label, t.rep);
            DgpSpec spec = DgpSpec::make(dgp, params);
            spec.apply_config(plan.dgp_constants);
            const DgpOracle oracle(spec);
            const auto t0 = std::chrono::steady_clock::now();
            try {
                AcfsConfig cfg = plan.acfs;
                set_grid_value(cfg, t.parameter, t.value);
                cfg.scale_budgets(plan.scale_divisor);
                const Solution sol = run_acfs(oracle, cfg, params, row.seed);
                const RiskEstimate est = oracle_evaluate(
                    oracle, sol.x_star, plan.oracle_eval_draws, params,
                    eval_seed(plan.master_seed, row.dgp, lambda, t.rep), false);
                row.x = sol.x_star.x;
                row.oracle_j = est.total;
                row.oracle_ec = est.expected_cost;
                row.oracle_cvar = est.cvar;
                row.oracle_calls = sol.ledger.total();
            } catch (const std::exception& e) {
                row.oracle_j = std::nan("");
                row.oracle_ec = std::nan("");
                row.oracle_cvar = std::nan("");
                row.status = "failed: " + sanitize(e.what());
            }
            row.seconds =
                plan.record_timing
                    ? std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()
                    : 0.0;
            std::lock_guard<std::mutex> lock(writer_mutex);
            writer.submit(static_cast<int>(i), std::move(row));
        }
    };
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    // per-point summaries (Table-style: J_med, J_SD, Q25-Q75)
    const std::vector<ReplicationRow> rows = read_results(path);
    std::vector<SensitivityPoint> points;
    std::ofstream txt(dir + "/sensitivity.txt");
    std::ofstream tsv(dir + "/sensitivity.tsv");
    tsv << "parameter\tvalue\tis_default\tn\tJ_med\tJ_sd\tJ_q25\tJ_q75\n";
    for (const SensitivityGridEntry& entry : sensitivity_grid()) {
        txt << "== " << entry.parameter << " ==\n";
        for (double value : entry.values) {
            std::ostringstream label;
            label << "acfs[" << entry.parameter << '=' << value << ']';
            std::vector<double> j;
            for (const ReplicationRow& r : rows)
                if (r.ok() && r.method == label.str()) j.push_back(r.oracle_j);
            if (j.empty()) continue;
            SensitivityPoint pt;
            pt.parameter = entry.parameter;
            pt.value = value;
            pt.is_default = value == entry.default_value;
            pt.n = static_cast<int>(j.size());
            pt.j = summarize(j);
            points.push_back(pt);
            char line[200];
            std::snprintf(line, sizeof(line),
                          "  %8g%s n=%-4d J_med=%12.1f J_sd=%12.1f IQR=[%.1f; %.1f]\n", value,
                          pt.is_default ? "*" : " ", pt.n, pt.j.median, pt.j.sd, pt.j.q25,
                          pt.j.q75);
            txt << line;
            tsv << entry.parameter << '\t' << value << '\t' << (pt.is_default ? 1 : 0) << '\t'
                << pt.n << '\t' << pt.j.median << '\t' << pt.j.sd << '\t' << pt.j.q25 << '\t'
                << pt.j.q75 << '\n';
        }
    }
    return points;
}

} // namespace acfs
