#include "acfs/dgp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

#include "acfs/special.hpp"

namespace acfs {

std::string to_string(DgpKind kind) { return kind == DgpKind::Dgp1 ? "dgp1" : "dgp2"; }

DgpKind dgp_kind_from_string(const std::string& s) {
    if (s == "dgp1" || s == "DGP1") return DgpKind::Dgp1;
    if (s == "dgp2" || s == "DGP2") return DgpKind::Dgp2;
    throw std::runtime_error("unknown DGP: " + s);
}

DgpSpec DgpSpec::make(DgpKind kind, RiskParams risk) {
    DgpSpec spec;
    spec.kind = kind;
    spec.risk = risk;
    return spec;
}

namespace {

constexpr std::array<std::pair<int, int>, 10> kPairs{{{0, 1}, {0, 2}, {0, 3}, {0, 4}, {1, 2},
                                                      {1, 3}, {1, 4}, {2, 3}, {2, 4}, {3, 4}}};

std::string pair_key(int j, int k) {
    return "d" + std::to_string(j + 1) + std::to_string(k + 1);
}

} // namespace

std::map<std::string, double> DgpSpec::coefficient_table() const {
    std::map<std::string, double> t;
    for (int j = 0; j < 5; ++j) {
        const std::string i = std::to_string(j + 1);
        t["dgp1.c_dmg.a" + i] = c1.dmg_a[j];
        t["dgp1.c_hp.t0_" + i] = c1.hp_t0[j];
        t["dgp1.c_hp.t1_" + i] = c1.hp_t1[j];
        t["dgp1.c_hp.b" + i] = c1.hp_b[j];
        t["dgp2.c_hold.h" + i] = c2.hold_h[j];
        t["dgp2.c_short.s" + i] = c2.short_s[j];
        t["dgp2.cap.base" + i] = c2.cap_base[j];
        t["dgp2.cap.alloc" + i] = c2.cap_alloc[j];
        t["dgp2.cap.hedge" + i] = c2.cap_hedge[j];
        t["dgp2.c_proc.p" + i] = c2.proc_p[j];
    }
    t["dgp1.c_ep.kappa"] = c1.ep_kappa;
    t["dgp1.c_ep.beta"] = c1.ep_beta;
    t["dgp1.c_ep.gamma"] = c1.ep_gamma;
    t["dgp1.c_ep.cap"] = c1.ep_cap;
    for (std::size_t p = 0; p < kPairs.size(); ++p)
        t["dgp1.c_del." + pair_key(kPairs[p].first, kPairs[p].second)] = c1.del_d[p];
    t["dgp1.c_ac.q"] = c1.ac_q;
    t["dgp2.c_proc.exponent"] = c2.proc_exponent;
    t["dgp2.c_coord.kappa"] = c2.coord_kappa;
    t["dgp2.c_setup.q"] = c2.setup_q;
    return t;
}

void DgpSpec::apply_config(const KeyValueConfig& cfg) {
    for (int j = 0; j < 5; ++j) {
        const std::string i = std::to_string(j + 1);
        c1.dmg_a[j] = cfg.get_double("dgp1.c_dmg.a" + i, c1.dmg_a[j]);
        c1.hp_t0[j] = cfg.get_double("dgp1.c_hp.t0_" + i, c1.hp_t0[j]);
        c1.hp_t1[j] = cfg.get_double("dgp1.c_hp.t1_" + i, c1.hp_t1[j]);
        c1.hp_b[j] = cfg.get_double("dgp1.c_hp.b" + i, c1.hp_b[j]);
        c2.hold_h[j] = cfg.get_double("dgp2.c_hold.h" + i, c2.hold_h[j]);
        c2.short_s[j] = cfg.get_double("dgp2.c_short.s" + i, c2.short_s[j]);
        c2.cap_base[j] = cfg.get_double("dgp2.cap.base" + i, c2.cap_base[j]);
        c2.cap_alloc[j] = cfg.get_double("dgp2.cap.alloc" + i, c2.cap_alloc[j]);
        c2.cap_hedge[j] = cfg.get_double("dgp2.cap.hedge" + i, c2.cap_hedge[j]);
        c2.proc_p[j] = cfg.get_double("dgp2.c_proc.p" + i, c2.proc_p[j]);
    }
    c1.ep_kappa = cfg.get_double("dgp1.c_ep.kappa", c1.ep_kappa);
    c1.ep_beta = cfg.get_double("dgp1.c_ep.beta", c1.ep_beta);
    c1.ep_gamma = cfg.get_double("dgp1.c_ep.gamma", c1.ep_gamma);
    c1.ep_cap = cfg.get_double("dgp1.c_ep.cap", c1.ep_cap);
    for (std::size_t p = 0; p < kPairs.size(); ++p)
        c1.del_d[p] = cfg.get_double("dgp1.c_del." + pair_key(kPairs[p].first, kPairs[p].second),
                                     c1.del_d[p]);
    c1.ac_q = cfg.get_double("dgp1.c_ac.q", c1.ac_q);
    c2.proc_exponent = cfg.get_double("dgp2.c_proc.exponent", c2.proc_exponent);
    c2.coord_kappa = cfg.get_double("dgp2.c_coord.kappa", c2.coord_kappa);
    c2.setup_q = cfg.get_double("dgp2.c_setup.q", c2.setup_q);
}

// ---------------------------------------------------------------------------
// Marginal parameter maps
// ---------------------------------------------------------------------------

Eigen::Matrix<double, 5, 5> correlation_repair(const Eigen::Matrix<double, 5, 5>& raw) {
    if ((raw - raw.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw std::domain_error("correlation_repair: input must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 5, 5>> es(raw);
    if (es.eigenvalues().minCoeff() > 1e-6) return raw; // already PD, keep verbatim
    Eigen::Matrix<double, 5, 1> ev = es.eigenvalues().cwiseMax(1e-6);
    Eigen::Matrix<double, 5, 5> m =
        es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    const Eigen::Matrix<double, 5, 1> d = m.diagonal().cwiseSqrt();
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) m(i, j) /= d(i) * d(j);
    m = 0.5 * (m + m.transpose());
    m.diagonal().setOnes();
    return m;
}

namespace {

Eigen::Matrix<double, 5, 5> build_corr(const std::array<double, 10>& off) {
    Eigen::Matrix<double, 5, 5> r = Eigen::Matrix<double, 5, 5>::Identity();
    for (std::size_t p = 0; p < kPairs.size(); ++p) {
        const double v = std::clamp(off[p], -0.99, 0.99);
        r(kPairs[p].first, kPairs[p].second) = v;
        r(kPairs[p].second, kPairs[p].first) = v;
    }
    return correlation_repair(r);
}

void require_feasible(const Decision& d, const char* who) {
    if (!is_feasible(d)) throw std::domain_error(std::string(who) + ": infeasible decision");
}

} // namespace

MarginalParams dgp1_params(const Decision& d) {
    require_feasible(d, "dgp1_params");
    const double x1 = d.x(0), x2 = d.x(1), x3 = d.x(2), x4 = d.x(3), x5 = d.x(4), x6 = d.x(5);
    const double x0 = d.residual();
    MarginalParams p;
    p.mu << 2.10 - 1.50 * x6 - 1.10 * x1 + 1.20 * x0 + 0.75 * x2 * x3 - 0.55 * x1 * x6 * x6,
        2.30 - 1.30 * x1 - 1.70 * x3 + 0.95 * x0 - 0.65 * x6 * x6 + 0.45 * x2 * x2,
        1.90 - 1.50 * x2 - 1.05 * x6 + 0.75 * x0 + 0.55 * x1 * x2 - 0.35 * x3 * x6,
        1.70 - 1.20 * x4 - 0.90 * x6 + 0.60 * x0 + 0.40 * x3 * x5 - 0.30 * x2 * x4,
        1.50 - 1.00 * x5 - 0.80 * x6 + 0.50 * x0 + 0.35 * x1 * x4 - 0.25 * x3 * x3;
    p.sigma << 0.20 + 0.75 * (1 - x6) * (1 - x1) + 0.30 * x0,
        0.24 + 0.65 * (1 - x3) + 0.28 * (1 - x6) + 0.22 * x0,
        0.22 + 0.60 * (1 - x2) + 0.20 * (1 - x6) + 0.16 * x0,
        0.18 + 0.50 * (1 - x4) + 0.18 * (1 - x6) + 0.14 * x0,
        0.16 + 0.45 * (1 - x5) + 0.15 * (1 - x6) + 0.12 * x0;
    p.nu << 3.0 + 2.5 * x6, 3.0 + 2.0 * x3, 3.0 + 1.5 * x2, 3.5 + 2.0 * x4, 3.5 + 1.5 * x5;
    p.corr = build_corr({0.55 + 0.28 * (1 - x6), 0.20 + 0.28 * (1 - x1), 0.15 + 0.20 * (1 - x2),
                         0.10 + 0.18 * (1 - x3), 0.50 + 0.32 * (1 - 2 * x2),
                         0.20 + 0.22 * (1 - x4), 0.15 + 0.18 * (1 - x5), 0.25 + 0.20 * (1 - x3),
                         0.18 + 0.16 * (1 - x4), 0.30 + 0.25 * (1 - 2 * x5)});
    return p;
}

MarginalParams dgp2_params(const Decision& d) {
    require_feasible(d, "dgp2_params");
    const double x1 = d.x(0), x2 = d.x(1), x3 = d.x(2), x4 = d.x(3), x5 = d.x(4), x6 = d.x(5);
    const double x0 = d.residual();
    MarginalParams p;
    // log-normal location, affine plus interactions; every component reaches
    // every mu_j through the residual allocation x0
    p.mu << 1.60 - 0.50 * x1 - 0.28 * x6 + 0.42 * x0 + 0.24 * x2 * x3 - 0.18 * x1 * x6,
        1.75 - 0.55 * x2 - 0.24 * x6 + 0.36 * x0 + 0.20 * x3 * x4 - 0.14 * x2 * x6,
        1.50 - 0.45 * x3 - 0.20 * x6 + 0.30 * x0 + 0.18 * x1 * x5 - 0.12 * x3 * x6,
        1.40 - 0.40 * x4 - 0.18 * x6 + 0.26 * x0 + 0.15 * x2 * x5 - 0.10 * x4 * x6,
        1.30 - 0.35 * x5 - 0.16 * x6 + 0.22 * x0 + 0.12 * x1 * x4 - 0.08 * x5 * x6;
    const std::array<double, 5> base{0.063, 0.060, 0.056, 0.053, 0.049};
    const std::array<double, 5> slope{0.077, 0.070, 0.063, 0.056, 0.053};
    const std::array<double, 5> cross{-0.021, -0.018, -0.018, -0.014, -0.014};
    for (int j = 0; j < 5; ++j)
        p.sigma(j) = std::max(0.05, base[j] + slope[j] * (1.0 - d.x(j)) + cross[j] * x6);
    p.nu.setConstant(1e6); // unused by the log-normal path
    const std::array<double, 10> b{0.30, 0.22, 0.18, 0.14, 0.26, 0.20, 0.16, 0.24, 0.18, 0.22};
    const std::array<double, 10> c{0.25, 0.20, 0.16, 0.12, 0.22, 0.18, 0.14, 0.20, 0.15, 0.18};
    std::array<double, 10> off{};
    for (std::size_t i = 0; i < off.size(); ++i) off[i] = b[i] + c[i] * (1.0 - x6);
    p.corr = build_corr(off);
    return p;
}

// ---------------------------------------------------------------------------
// Samplers
// ---------------------------------------------------------------------------

namespace {

// Correlated standard normals; with antithetic pairing the lower half block
// is the exact negation of the upper half.
MatX5 correlated_normals(const Eigen::Matrix<double, 5, 5>& corr, int n, std::uint64_t seed,
                         bool antithetic) {
    if (n <= 0) throw std::domain_error("sampler: n must be positive");
    if (antithetic && n % 2 != 0)
        throw std::domain_error("sampler: n must be even with antithetic pairing");
    Eigen::LLT<Eigen::Matrix<double, 5, 5>> llt(corr);
    if (llt.info() != Eigen::Success) {
        // repaired matrices are PD; tiny ridge covers borderline round-off
        llt.compute(corr + 1e-10 * Eigen::Matrix<double, 5, 5>::Identity());
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("sampler: correlation factorisation failed");
    }
    const Eigen::Matrix<double, 5, 5> l = llt.matrixL();
    RngStream rng(seed);
    const int fresh = antithetic ? n / 2 : n;
    MatX5 e(fresh, 5);
    for (int i = 0; i < fresh; ++i)
        for (int j = 0; j < 5; ++j) e(i, j) = rng.normal();
    MatX5 z(n, 5);
    z.topRows(fresh) = e * l.transpose();
    // negate the mapped block so each pair cancels exactly
    if (antithetic) z.bottomRows(n / 2) = -z.topRows(n / 2);
    return z;
}

} // namespace

ScenarioMatrix sample_dgp1_with(const MarginalParams& p, const Decision& x, int n,
                                std::uint64_t seed, bool antithetic) {
    ScenarioMatrix s;
    s.z = correlated_normals(p.corr, n, seed, antithetic);
    s.w.resize(n, 5);
    for (int j = 0; j < 5; ++j) {
        const double nu = p.nu(j);
        for (int i = 0; i < n; ++i) {
            const double u = norm_cdf(s.z(i, j));
            s.w(i, j) = p.mu(j) + p.sigma(j) * student_t_quantile(u, nu);
        }
    }
    s.seed = seed;
    s.antithetic = antithetic;
    s.decision_snapshot = x;
    return s;
}

ScenarioMatrix sample_dgp2_with(const MarginalParams& p, const Decision& x, int n,
                                std::uint64_t seed, bool antithetic) {
    ScenarioMatrix s;
    s.z = correlated_normals(p.corr, n, seed, antithetic);
    s.w.resize(n, 5);
    // U = Phi(Z) followed by the log-normal quantile collapses to exp(mu + sigma z)
    for (int j = 0; j < 5; ++j)
        for (int i = 0; i < n; ++i) s.w(i, j) = std::exp(p.mu(j) + p.sigma(j) * s.z(i, j));
    s.seed = seed;
    s.antithetic = antithetic;
    s.decision_snapshot = x;
    return s;
}

ScenarioMatrix sample_dgp1(const Decision& x, int n, std::uint64_t seed, bool antithetic) {
    return sample_dgp1_with(dgp1_params(x), x, n, seed, antithetic);
}

ScenarioMatrix sample_dgp2(const Decision& x, int n, std::uint64_t seed, bool antithetic) {
    return sample_dgp2_with(dgp2_params(x), x, n, seed, antithetic);
}

// ---------------------------------------------------------------------------
// Cost functions
// ---------------------------------------------------------------------------

std::vector<double> cost_dgp1_at(const MatX5& w, const Decision& d, const DgpSpec& spec) {
    const Dgp1CostCoeffs& c = spec.c1;
    const double x6 = d.x(5);
    const double ac = c.ac_q * d.x.squaredNorm();
    std::array<double, 5> thresh{};
    for (int j = 0; j < 5; ++j) thresh[j] = c.hp_t0[j] + c.hp_t1[j] * x6;
    std::vector<double> cost(static_cast<std::size_t>(w.rows()));
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        double dmg = 0.0, hp = 0.0, wmax = -1e300;
        std::array<double, 5> pos{};
        for (int j = 0; j < 5; ++j) {
            const double wj = w(i, j);
            pos[j] = std::max(wj, 0.0);
            dmg += c.dmg_a[j] * pos[j] * pos[j] * (1.0 - d.x(j));
            hp += c.hp_b[j] * std::max(wj - thresh[j], 0.0);
            wmax = std::max(wmax, wj);
        }
        const double ep = std::min(c.ep_cap, c.ep_kappa * std::exp(c.ep_beta * wmax - c.ep_gamma));
        double del = 0.0;
        for (std::size_t p = 0; p < kPairs.size(); ++p)
            del += c.del_d[p] * pos[kPairs[p].first] * pos[kPairs[p].second];
        cost[static_cast<std::size_t>(i)] = dmg + hp + ep + del + ac;
    }
    return cost;
}

std::vector<double> cost_dgp2_at(const MatX5& w, const Decision& d, const DgpSpec& spec) {
    const Dgp2CostCoeffs& c = spec.c2;
    const double alloc = d.alloc_sum();
    const double setup = c.setup_q * d.x.squaredNorm();
    std::array<double, 5> cap{};
    for (int j = 0; j < 5; ++j)
        cap[j] = c.cap_base[j] + c.cap_alloc[j] * d.x(j) + c.cap_hedge[j] * d.x(5);
    std::vector<double> cost(static_cast<std::size_t>(w.rows()));
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        double hold = 0.0, shortc = 0.0, proc = 0.0, wsum = 0.0;
        for (int j = 0; j < 5; ++j) {
            const double wj = w(i, j);
            hold += c.hold_h[j] * std::max(cap[j] - wj, 0.0);
            shortc += c.short_s[j] * std::max(wj - cap[j], 0.0);
            // synthetic forest draws can dip below zero; hinge keeps the power well-defined
            proc += c.proc_p[j] * std::pow(std::max(wj, 0.0), c.proc_exponent);
            wsum += wj;
        }
        const double coord = c.coord_kappa * alloc * (wsum / 5.0);
        cost[static_cast<std::size_t>(i)] = hold + shortc + proc + coord + setup;
    }
    return cost;
}

namespace {

void check_snapshot(const ScenarioMatrix& scen, const Decision& x, const char* who) {
    if ((scen.decision_snapshot.x - x.x).cwiseAbs().maxCoeff() != 0.0)
        throw std::domain_error(std::string(who) + ": scenarios were drawn at a different decision");
}

} // namespace

std::vector<double> cost_dgp1(const ScenarioMatrix& scen, const Decision& x, const DgpSpec& spec) {
    check_snapshot(scen, x, "cost_dgp1");
    return cost_dgp1_at(scen.w, x, spec);
}

std::vector<double> cost_dgp2(const ScenarioMatrix& scen, const Decision& x, const DgpSpec& spec) {
    check_snapshot(scen, x, "cost_dgp2");
    return cost_dgp2_at(scen.w, x, spec);
}

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

std::vector<double> Oracle::cost(const ScenarioMatrix& scen, const Decision& x) const {
    check_snapshot(scen, x, "Oracle::cost");
    return cost_at(scen.w, x);
}

ScenarioMatrix DgpOracle::sample(const Decision& x, int n, std::uint64_t seed,
                                 bool antithetic) const {
    return spec_.kind == DgpKind::Dgp1 ? sample_dgp1(x, n, seed, antithetic)
                                       : sample_dgp2(x, n, seed, antithetic);
}

std::vector<double> DgpOracle::cost_at(const MatX5& w, const Decision& x) const {
    return spec_.kind == DgpKind::Dgp1 ? cost_dgp1_at(w, x, spec_) : cost_dgp2_at(w, x, spec_);
}

ScenarioMatrix QuadraticOracle::sample(const Decision& x, int n, std::uint64_t seed,
                                       bool antithetic) const {
    if (n <= 0) throw std::domain_error("sampler: n must be positive");
    if (antithetic && n % 2 != 0)
        throw std::domain_error("sampler: n must be even with antithetic pairing");
    ScenarioMatrix s;
    s.w = MatX5::Zero(n, 5);
    s.z = MatX5::Zero(n, 5);
    s.seed = seed;
    s.antithetic = antithetic;
    s.decision_snapshot = x;
    return s;
}

std::vector<double> QuadraticOracle::cost_at(const MatX5& w, const Decision& x) const {
    const double v = base_ + curvature_ * (x.x - target_.x).squaredNorm();
    return std::vector<double>(static_cast<std::size_t>(w.rows()), v);
}

RiskEstimate oracle_evaluate(const Oracle& oracle, const Decision& x, int n,
                             const RiskParams& params, std::uint64_t seed, bool antithetic,
                             OracleLedger* ledger, const std::string& line) {
    if (!is_feasible(x)) throw std::domain_error("oracle_evaluate: infeasible decision");
    if (n < 2) throw std::domain_error("oracle_evaluate: n must be at least 2");
    const ScenarioMatrix scen = oracle.sample(x, n, seed, antithetic);
    if (ledger) ledger->add(line, n);
    return spectral_risk(oracle.cost(scen, x), params);
}

const ScenarioMatrix& CrnScenarioCache::get(const Decision& x, int n, std::uint64_t seed,
                                            bool antithetic, OracleLedger* ledger,
                                            const std::string& line) {
    const bool hit = valid_ && key_n_ == n && key_seed_ == seed && key_antithetic_ == antithetic &&
                     (key_x_ - x.x).cwiseAbs().maxCoeff() == 0.0;
    if (!hit) {
        cached_ = oracle_->sample(x, n, seed, antithetic);
        if (ledger) ledger->add(line, n);
        valid_ = true;
        key_x_ = x.x;
        key_n_ = n;
        key_seed_ = seed;
        key_antithetic_ = antithetic;
    }
    return cached_;
}

} // namespace acfs
