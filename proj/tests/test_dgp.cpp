#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <vector>

#include "acfs/dgp.hpp"
#include "acfs/fd_gradient.hpp"
#include "acfs/rng.hpp"
#include "acfs/stats.hpp"

using namespace acfs;

namespace {

Decision dec(double x1, double x2, double x3, double x4, double x5, double x6) {
    return feasible_project((Vec6() << x1, x2, x3, x4, x5, x6).finished());
}

double sample_var(const std::vector<double>& v) {
    double m = 0;
    for (double t : v) m += t;
    m /= static_cast<double>(v.size());
    double ss = 0;
    for (double t : v) ss += (t - m) * (t - m);
    return ss / static_cast<double>(v.size() - 1);
}

double sample_mean(const std::vector<double>& v) {
    double m = 0;
    for (double t : v) m += t;
    return m / static_cast<double>(v.size());
}

} // namespace

TEST_CASE("dgp1 parameter map: hand-evaluated table rows") {
    const MarginalParams zero = dgp1_params(dec(0, 0, 0, 0, 0, 0)); // x0 = 1
    CHECK(zero.mu(0) == doctest::Approx(3.30));
    CHECK(zero.sigma(0) == doctest::Approx(1.25));
    CHECK(zero.nu(0) == doctest::Approx(3.0));
    CHECK(zero.mu(1) == doctest::Approx(2.30 + 0.95));
    CHECK(zero.sigma(4) == doctest::Approx(0.16 + 0.45 + 0.15 + 0.12));

    const MarginalParams hedge = dgp1_params(dec(0, 0, 0, 0, 0, 1)); // x6 = 1
    CHECK(hedge.nu(0) == doctest::Approx(5.5));
    CHECK(hedge.corr(0, 1) == doctest::Approx(0.55).epsilon(1e-9));

    const MarginalParams x2hi = dgp1_params(dec(0, 0.70, 0, 0, 0, 0));
    CHECK(x2hi.corr(1, 2) == doctest::Approx(0.50 + 0.32 * (1 - 1.4)).epsilon(1e-9));
    CHECK(x2hi.nu(2) == doctest::Approx(3.0 + 1.5 * 0.70));
}

TEST_CASE("dgp1 parameters reject infeasible decisions") {
    Decision bad;
    bad.x << 0.8, 0, 0, 0, 0, 0.5; // x1 > 0.70
    CHECK_THROWS_AS(dgp1_params(bad), std::domain_error);
}

TEST_CASE("correlation repair: identity, PD fixed point, non-PD input") {
    using M5 = Eigen::Matrix<double, 5, 5>;
    const M5 id = M5::Identity();
    CHECK((correlation_repair(id) - id).cwiseAbs().maxCoeff() == 0.0);

    M5 pd = M5::Identity();
    pd(0, 1) = pd(1, 0) = 0.3;
    pd(2, 3) = pd(3, 2) = -0.2;
    CHECK((correlation_repair(pd) - pd).cwiseAbs().maxCoeff() < 1e-9);

    M5 bad = M5::Identity();
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
            if (i != j) bad(i, j) = 0.95;
    bad(0, 1) = bad(1, 0) = -0.95; // one strongly inconsistent pair
    Eigen::SelfAdjointEigenSolver<M5> before(bad);
    REQUIRE(before.eigenvalues().minCoeff() < 0.0);
    const M5 fixed = correlation_repair(bad);
    Eigen::SelfAdjointEigenSolver<M5> after(fixed);
    CHECK(after.eigenvalues().minCoeff() > 0.0);
    for (int i = 0; i < 5; ++i) CHECK(fixed(i, i) == doctest::Approx(1.0).epsilon(1e-12));

    M5 asym = M5::Identity();
    asym(0, 1) = 0.5; // not mirrored
    CHECK_THROWS_AS(correlation_repair(asym), std::domain_error);
}

TEST_CASE("samplers: determinism, antithetic pairing, degenerate scale") {
    const Decision x = dec(0.1, 0.2, 0.1, 0.05, 0.15, 0.6);
    const ScenarioMatrix a = sample_dgp1(x, 64, 123, true);
    const ScenarioMatrix b = sample_dgp1(x, 64, 123, true);
    CHECK((a.w - b.w).cwiseAbs().maxCoeff() == 0.0);

    // exact (Z, -Z) pairing: paired rows cancel bitwise, so column sums are 0
    CHECK((a.z.topRows(32) + a.z.bottomRows(32)).cwiseAbs().maxCoeff() == 0.0);

    const ScenarioMatrix c = sample_dgp2(x, 64, 5, true);
    CHECK((c.z.topRows(32) + c.z.bottomRows(32)).cwiseAbs().maxCoeff() == 0.0);
    CHECK(c.w.minCoeff() > 0.0); // log-normal support

    CHECK_THROWS_AS(sample_dgp1(x, 63, 1, true), std::domain_error);

    MarginalParams degen = dgp1_params(x);
    degen.sigma.setZero();
    const ScenarioMatrix d = sample_dgp1_with(degen, x, 16, 7, false);
    for (int i = 0; i < 16; ++i)
        CHECK((d.w.row(i).transpose() - degen.mu).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("sampler medians match the marginal location maps") {
    const Decision x = dec(0.12, 0.08, 0.2, 0.05, 0.1, 0.45);
    const int n = 50000;
    const MarginalParams p1 = dgp1_params(x);
    const ScenarioMatrix s1 = sample_dgp1(x, n, 11, false);
    const MarginalParams p2 = dgp2_params(x);
    const ScenarioMatrix s2 = sample_dgp2(x, n, 13, false);

    RngStream boot(99);
    for (int j = 0; j < 5; ++j) {
        std::vector<double> col1(static_cast<std::size_t>(n)), col2(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            col1[static_cast<std::size_t>(i)] = s1.w(i, j);
            col2[static_cast<std::size_t>(i)] = s2.w(i, j);
        }
        // bootstrap SE of the sample median
        const auto median_se = [&boot](const std::vector<double>& col) {
            std::vector<double> meds;
            std::vector<double> resample(col.size());
            for (int b = 0; b < 60; ++b) {
                for (std::size_t i = 0; i < col.size(); ++i)
                    resample[i] = col[boot.integer(col.size())];
                meds.push_back(median_of(resample));
            }
            return std::sqrt(sample_var(meds));
        };
        // t location-scale median is mu; log-normal median is exp(mu)
        CHECK(std::fabs(median_of(col1) - p1.mu(j)) < 3.0 * median_se(col1) + 1e-9);
        CHECK(std::fabs(median_of(col2) - std::exp(p2.mu(j))) < 3.0 * median_se(col2) + 1e-9);
    }
}

TEST_CASE("dgp2 parameter map: committed table properties") {
    const MarginalParams base = dgp2_params(dec(0, 0, 0, 0, 0, 0)); // x0 = 1
    CHECK(base.mu(0) == doctest::Approx(1.60 + 0.42));
    CHECK(base.mu(4) == doctest::Approx(1.30 + 0.22));
    CHECK(base.sigma(0) == doctest::Approx(0.063 + 0.077));

    RngStream rng(17);
    for (int rep = 0; rep < 100; ++rep) {
        Vec6 v;
        for (int d = 0; d < 5; ++d) v(d) = 0.7 * rng.uniform();
        v(5) = rng.uniform();
        const MarginalParams p = dgp2_params(feasible_project(v));
        for (int j = 0; j < 5; ++j) CHECK(p.sigma(j) >= 0.05);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 5, 5>> es(p.corr);
        CHECK(es.eigenvalues().minCoeff() > 0.0);
    }

    // location response to x1 matches the committed coefficient pattern:
    // d mu1 / d x1 = -0.50 - 0.42 (through x0) - 0.18 x6 away from the x0 kink
    const Decision lo = dec(0.10, 0.1, 0.1, 0.1, 0.1, 0.5);
    const Decision hi = dec(0.20, 0.1, 0.1, 0.1, 0.1, 0.5);
    const double slope = (dgp2_params(hi).mu(0) - dgp2_params(lo).mu(0)) / 0.1;
    CHECK(slope == doctest::Approx(-0.50 - 0.42 - 0.18 * 0.5).epsilon(1e-9));
}

TEST_CASE("endogeneity: KS distance between distant decisions") {
    const int n = 10000;
    const ScenarioMatrix a = sample_dgp1(dec(0, 0, 0, 0, 0, 0), n, 3, false);
    const ScenarioMatrix b = sample_dgp1(dec(0.7, 0.15, 0, 0, 0, 1.0), n, 4, false);
    std::vector<double> av(static_cast<std::size_t>(n)), bv(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        av[static_cast<std::size_t>(i)] = a.w(i, 0);
        bv[static_cast<std::size_t>(i)] = b.w(i, 0);
    }
    std::sort(av.begin(), av.end());
    std::sort(bv.begin(), bv.end());
    double ks = 0.0;
    std::size_t ia = 0, ib = 0;
    while (ia < av.size() && ib < bv.size()) {
        if (av[ia] < bv[ib]) ++ia;
        else ++ib;
        ks = std::max(ks, std::fabs(static_cast<double>(ia) / n - static_cast<double>(ib) / n));
    }
    CHECK(ks > 0.05);
}

TEST_CASE("dgp1 cost form: baselines, nonnegativity, mismatch guard") {
    const DgpSpec spec = DgpSpec::make(DgpKind::Dgp1, {0.7, 0.95});
    const Decision zero = dec(0, 0, 0, 0, 0, 0);
    MatX5 w0 = MatX5::Zero(3, 5);
    const std::vector<double> at_zero = cost_dgp1_at(w0, zero, spec);
    // W = 0: only the allocation cost (here 0) and the exp-tilt baseline remain
    for (double c : at_zero)
        CHECK(c == doctest::Approx(spec.c1.ep_kappa * std::exp(-spec.c1.ep_gamma)));

    const Decision x = dec(0.2, 0.1, 0.05, 0.15, 0.1, 0.8);
    const std::vector<double> at_x = cost_dgp1_at(w0, x, spec);
    const double ac = spec.c1.ac_q * x.x.squaredNorm();
    for (double c : at_x)
        CHECK(c == doctest::Approx(ac + spec.c1.ep_kappa * std::exp(-spec.c1.ep_gamma)));

    const ScenarioMatrix scen = sample_dgp1(x, 200, 21, false);
    for (double c : cost_dgp1(scen, x, spec)) CHECK(c >= ac);

    const Decision other = dec(0.1, 0.1, 0.05, 0.15, 0.1, 0.8);
    CHECK_THROWS_AS(cost_dgp1(scen, other, spec), std::domain_error);
}

TEST_CASE("dgp2 cost form: hinge kink, zero decision, shortage slope") {
    const DgpSpec spec = DgpSpec::make(DgpKind::Dgp2, {0.7, 0.95});
    const Decision x = dec(0.2, 0.1, 0.05, 0.15, 0.1, 0.8);
    Vec5 cap;
    for (int j = 0; j < 5; ++j)
        cap(j) = spec.c2.cap_base[j] + spec.c2.cap_alloc[j] * x.x(j) + spec.c2.cap_hedge[j] * x.x(5);

    // demand exactly at every threshold: zero holding and shortage cost
    MatX5 at_cap(1, 5);
    at_cap.row(0) = cap.transpose();
    double expected = spec.c2.setup_q * x.x.squaredNorm();
    double wsum = 0.0;
    for (int j = 0; j < 5; ++j) {
        expected += spec.c2.proc_p[j] * std::pow(cap(j), spec.c2.proc_exponent);
        wsum += cap(j);
    }
    expected += spec.c2.coord_kappa * x.alloc_sum() * wsum / 5.0;
    CHECK(cost_dgp2_at(at_cap, x, spec)[0] == doctest::Approx(expected).epsilon(1e-12));

    // all-zero decision kills the quadratic setup and coordination terms
    const Decision zero = dec(0, 0, 0, 0, 0, 0);
    MatX5 w(1, 5);
    w.row(0) << 1.0, 1.0, 1.0, 1.0, 1.0;
    double man = 0.0;
    for (int j = 0; j < 5; ++j) {
        man += spec.c2.hold_h[j] * std::max(spec.c2.cap_base[j] - 1.0, 0.0);
        man += spec.c2.short_s[j] * std::max(1.0 - spec.c2.cap_base[j], 0.0);
        man += spec.c2.proc_p[j];
    }
    CHECK(cost_dgp2_at(w, zero, spec)[0] == doctest::Approx(man).epsilon(1e-12));

    // far above threshold the shortage term dominates the marginal cost and is
    // linear in the exceedance: subtracting the analytic smooth-term marginals
    // leaves exactly s_1
    MatX5 wa(1, 5), wb(1, 5);
    wa.row(0) = cap.transpose();
    wb.row(0) = cap.transpose();
    wa(0, 0) = cap(0) + 20.0;
    wb(0, 0) = cap(0) + 20.0 + 1e-3;
    const double slope = (cost_dgp2_at(wb, x, spec)[0] - cost_dgp2_at(wa, x, spec)[0]) / 1e-3;
    const double mid = cap(0) + 20.0 + 5e-4;
    const double proc_marginal =
        spec.c2.proc_p[0] * spec.c2.proc_exponent * std::pow(mid, spec.c2.proc_exponent - 1.0);
    const double coord_marginal = spec.c2.coord_kappa * x.alloc_sum() / 5.0;
    CHECK(slope - proc_marginal - coord_marginal ==
          doctest::Approx(spec.c2.short_s[0]).epsilon(1e-4));
    CHECK(spec.c2.short_s[0] > proc_marginal + coord_marginal); // shortage term dominates
    for (int j = 0; j < 5; ++j) CHECK(spec.c2.short_s[j] >= 5.0 * spec.c2.hold_h[j]);
}

TEST_CASE("antithetic pairs are unbiased for the expected cost") {
    const RiskParams params{0.7, 0.95};
    const DgpSpec spec = DgpSpec::make(DgpKind::Dgp2, params);
    const DgpOracle oracle(spec);
    const Decision x = dec(0.15, 0.1, 0.1, 0.1, 0.1, 0.5);
    std::vector<double> av, iid;
    const int n = 400;
    for (int s = 0; s < 30; ++s) {
        av.push_back(
            oracle_evaluate(oracle, x, n, params, derive_seed(50, {(std::uint64_t)s, 1}), true)
                .expected_cost);
        iid.push_back(
            oracle_evaluate(oracle, x, n, params, derive_seed(50, {(std::uint64_t)s, 2}), false)
                .expected_cost);
    }
    const double se = std::sqrt(sample_var(av) / 30.0 + sample_var(iid) / 30.0);
    CHECK(std::fabs(sample_mean(av) - sample_mean(iid)) < 4.0 * se);
}

TEST_CASE("antithetic pairing reduces the variance of the spectral risk on dgp2") {
    const RiskParams params{0.7, 0.95};
    const DgpOracle oracle(DgpSpec::make(DgpKind::Dgp2, params));
    RngStream rng(2024);
    Vec6 v;
    for (int d = 0; d < 5; ++d) v(d) = 0.7 * rng.uniform();
    v(5) = rng.uniform();
    const Decision x = feasible_project(v);
    int wins = 0;
    const int pairs = 20, k = 60;
    for (int p = 0; p < pairs; ++p) {
        std::vector<double> av, iid;
        for (int r = 0; r < k; ++r) {
            av.push_back(oracle_evaluate(oracle, x, 450, params,
                                         derive_seed(700 + p, {(std::uint64_t)r, 1}), true)
                             .total);
            iid.push_back(oracle_evaluate(oracle, x, 450, params,
                                          derive_seed(700 + p, {(std::uint64_t)r, 2}), false)
                              .total);
        }
        if (sample_var(av) < sample_var(iid)) ++wins;
    }
    CHECK(wins >= 14); // acceptance runs the full 3-decision, 50-pair protocol
}

TEST_CASE("oracle_evaluate: determinism, degeneracy, cross-seed agreement") {
    const RiskParams params{0.5, 0.5};
    const DgpOracle oracle(DgpSpec::make(DgpKind::Dgp1, params));
    const Decision x = dec(0.17, 0.17, 0.17, 0.17, 0.17, 1.0);

    const RiskEstimate a = oracle_evaluate(oracle, x, 500, params, 42, true);
    const RiskEstimate b = oracle_evaluate(oracle, x, 500, params, 42, true);
    CHECK(a.total == b.total);
    CHECK(a.expected_cost == b.expected_cost);

    Decision target = dec(0.1, 0.1, 0.1, 0.1, 0.1, 0.5);
    const QuadraticOracle quad(target, 10.0, 3.0);
    const RiskEstimate q = oracle_evaluate(quad, x, 100, params, 1, false);
    const double det_cost = 10.0 + 3.0 * (x.x - target.x).squaredNorm();
    CHECK(q.total == doctest::Approx(det_cost * 1.5).epsilon(1e-12)); // (1 + lambda) point mass

    const RiskEstimate s1 = oracle_evaluate(oracle, x, 2000, params, 1001, false);
    const RiskEstimate s2 = oracle_evaluate(oracle, x, 2000, params, 2002, false);
    const ScenarioMatrix scen = oracle.sample(x, 2000, 1001, false);
    const std::vector<double> costs = oracle.cost(scen, x);
    const double se = std::sqrt(sample_var(costs) / 2000.0);
    CHECK(std::fabs(s1.total - s2.total) < 4.0 * se);

    Decision infeasible;
    infeasible.x << 0.8, 0, 0, 0, 0, 0;
    CHECK_THROWS_AS(oracle_evaluate(oracle, infeasible, 100, params, 1, false), std::domain_error);
    CHECK_THROWS_AS(oracle_evaluate(oracle, x, 1, params, 1, false), std::domain_error);
}

TEST_CASE("ledger counts every drawn scenario row") {
    const RiskParams params{0.7, 0.95};
    const DgpOracle oracle(DgpSpec::make(DgpKind::Dgp1, params));
    const Decision x = dec(0.1, 0.1, 0.1, 0.1, 0.1, 0.5);
    OracleLedger ledger;
    oracle_evaluate(oracle, x, 300, params, 9, false, &ledger, "a");
    oracle_evaluate(oracle, x, 200, params, 9, true, &ledger, "b");
    oracle_evaluate(oracle, x, 100, params, 10, false, &ledger, "a");
    CHECK(ledger.line("a") == 400);
    CHECK(ledger.line("b") == 200);
    CHECK(ledger.total() == 600);
}

TEST_CASE("CRN cache: identity of retrievals and gradient determinism") {
    const RiskParams params{0.7, 0.95};
    const DgpSpec spec = DgpSpec::make(DgpKind::Dgp1, params);
    const DgpOracle oracle(spec);
    const Decision x = dec(0.2, 0.15, 0.1, 0.1, 0.05, 0.6);

    CrnScenarioCache cache(oracle);
    OracleLedger ledger;
    const ScenarioMatrix& m1 = cache.get(x, 64, 5, true, &ledger, "crn");
    const MatX5 snapshot = m1.w;
    const ScenarioMatrix& m2 = cache.get(x, 64, 5, true, &ledger, "crn");
    CHECK(&m1 == &m2);
    CHECK((m2.w - snapshot).cwiseAbs().maxCoeff() == 0.0);
    CHECK(ledger.line("crn") == 64); // second retrieval hit the cache

    const CostFn cost_fn = [&oracle](const MatX5& w, const Decision& d) {
        return oracle.cost_at(w, d);
    };
    const Vec6 g1 = fd_gradient_crn(cost_fn, params, x, m2, 1e-4);
    const Vec6 g2 = fd_gradient_crn(cost_fn, params, x, m2, 1e-4);
    CHECK((g1 - g2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("CRN reduces finite-difference gradient noise on dgp1") {
    const RiskParams params{0.7, 0.95};
    const DgpSpec spec = DgpSpec::make(DgpKind::Dgp1, params);
    const DgpOracle oracle(spec);
    const CostFn cost_fn = [&oracle](const MatX5& w, const Decision& d) {
        return oracle.cost_at(w, d);
    };
    const Decision x = dec(0.2, 0.15, 0.1, 0.1, 0.05, 0.6);
    const double step = 1e-3;

    std::vector<double> crn_on, crn_off;
    for (int s = 0; s < 20; ++s) {
        const ScenarioMatrix shared =
            oracle.sample(x, 450, derive_seed(1, {(std::uint64_t)s}), true);
        crn_on.push_back(fd_gradient_crn(cost_fn, params, x, shared, step)(0));

        // CRN off: each side of the difference prices its own fresh draws
        Vec6 up = x.x, dn = x.x;
        up(0) += step;
        dn(0) -= step;
        const Decision xp = feasible_project(up), xm = feasible_project(dn);
        const ScenarioMatrix wp = oracle.sample(xp, 450, derive_seed(2, {(std::uint64_t)s}), true);
        const ScenarioMatrix wm = oracle.sample(xm, 450, derive_seed(3, {(std::uint64_t)s}), true);
        const double jp = spectral_risk(cost_fn(wp.w, xp), params).total;
        const double jm = spectral_risk(cost_fn(wm.w, xm), params).total;
        crn_off.push_back((jp - jm) / (xp.x(0) - xm.x(0)));
    }
    CHECK(std::sqrt(sample_var(crn_on)) < std::sqrt(sample_var(crn_off)));
}

TEST_CASE("coefficient table round-trips through the constants file format") {
    DgpSpec spec = DgpSpec::make(DgpKind::Dgp1, {0.7, 0.95});
    std::string text;
    for (const auto& [key, value] : spec.coefficient_table()) {
        char line[128];
        std::snprintf(line, sizeof(line), "%s = %.17g\n", key.c_str(), value);
        text += line;
    }
    DgpSpec loaded = DgpSpec::make(DgpKind::Dgp1, {0.7, 0.95});
    loaded.c1.dmg_a[0] = -1.0; // scribble, then restore from the file
    loaded.c2.setup_q = -1.0;
    loaded.apply_config(KeyValueConfig::from_string(text));
    CHECK(loaded.coefficient_table() == spec.coefficient_table());

    DgpSpec tweaked = spec;
    KeyValueConfig cfg = KeyValueConfig::from_string("dgp1.c_dmg.a1 = 123.5\n");
    tweaked.apply_config(cfg);
    CHECK(tweaked.c1.dmg_a[0] == doctest::Approx(123.5));
    CHECK(tweaked.c1.dmg_a[1] == doctest::Approx(spec.c1.dmg_a[1]));
}
