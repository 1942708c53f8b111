#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "acfs/config.hpp"
#include "acfs/decision.hpp"
#include "acfs/risk.hpp"
#include "acfs/rng.hpp"
#include "acfs/special.hpp"
#include "acfs/stats.hpp"

using namespace acfs;

namespace {

// Brute-force Rockafellar-Uryasev objective: tau + mean(max(z - tau, 0)) / (1 - alpha),
// minimised over a candidate set of tau values. Independent of the sorted-tail path.
double ru_objective(const std::vector<double>& costs, double alpha, double tau) {
    double acc = 0.0;
    for (double c : costs) acc += std::max(c - tau, 0.0);
    return tau + acc / ((1.0 - alpha) * static_cast<double>(costs.size()));
}

double ru_min_over(const std::vector<double>& costs, double alpha,
                   const std::vector<double>& taus) {
    double best = 1e300;
    for (double t : taus) best = std::min(best, ru_objective(costs, alpha, t));
    return best;
}

std::vector<double> random_costs(RngStream& rng, int n, double scale = 10.0) {
    std::vector<double> costs(static_cast<std::size_t>(n));
    for (double& c : costs) c = scale * (rng.uniform() - 0.3) + rng.normal();
    return costs;
}

} // namespace

TEST_CASE("normal quantile round-trip") {
    for (double p = 0.0005; p < 1.0; p += 0.0125)
        CHECK(std::fabs(norm_cdf(norm_quantile(p)) - p) < 1e-12);
    CHECK(norm_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK_THROWS_AS(norm_quantile(0.0), std::domain_error);
    CHECK_THROWS_AS(norm_quantile(1.0), std::domain_error);
}

TEST_CASE("student-t quantile: median, symmetry, CDF residual") {
    for (double nu : {2.1, 3.0, 3.7, 5.5, 12.0, 50.0}) {
        CHECK(student_t_quantile(0.5, nu) == 0.0);
        for (double p : {0.01, 0.05, 0.2, 0.4, 0.6, 0.9, 0.975, 0.999}) {
            const double t = student_t_quantile(p, nu);
            CHECK(std::fabs(student_t_cdf(t, nu) - p) < 1e-10);
            CHECK(student_t_quantile(1.0 - p, nu) == doctest::Approx(-t).epsilon(1e-9));
        }
    }
}

TEST_CASE("student-t at huge dof matches the normal quantile") {
    for (double p = 0.01; p < 0.995; p += 0.01)
        CHECK(std::fabs(student_t_quantile(p, 1e6) - norm_quantile(p)) < 1e-4);
}

TEST_CASE("known t quantile values") {
    // t_{0.975} for nu=5 is 2.570581835... (standard table value)
    CHECK(student_t_quantile(0.975, 5.0) == doctest::Approx(2.5705818356).epsilon(1e-8));
    CHECK(student_t_quantile(0.95, 10.0) == doctest::Approx(1.8124611228).epsilon(1e-8));
}

TEST_CASE("empirical CVaR: degenerate and hand values") {
    CHECK(empirical_cvar({7.0, 7.0, 7.0}, 0.35) == doctest::Approx(7.0));
    CHECK(empirical_cvar({1, 2, 3, 4}, 0.0) == doctest::Approx(2.5));
    CHECK(empirical_cvar({1, 2, 3, 4}, 0.5) == doctest::Approx(3.5));
    // fractional tail: m = 1.6 -> (4 + 0.6*3)/1.6
    CHECK(empirical_cvar({1, 2, 3, 4}, 0.6) == doctest::Approx(5.8 / 1.6));
    CHECK_THROWS_AS(empirical_cvar({}, 0.5), std::domain_error);
    CHECK_THROWS_AS(empirical_cvar({1.0}, 1.0), std::domain_error);
    CHECK_THROWS_AS(empirical_cvar({1.0}, -0.1), std::domain_error);
}

TEST_CASE("CVaR equals the discrete RU minimum on random samples") {
    RngStream rng(12345);
    for (int rep = 0; rep < 300; ++rep) {
        const int n = 2 + static_cast<int>(rng.integer(49));
        const std::vector<double> costs = random_costs(rng, n);
        const double alpha = rng.uniform() * 0.98;
        // the minimiser sits at a sample point
        const double ru = ru_min_over(costs, alpha, costs);
        CHECK(empirical_cvar(costs, alpha) == doctest::Approx(ru).epsilon(1e-9));
    }
}

TEST_CASE("CVaR coherence: translation, homogeneity, alpha monotonicity") {
    RngStream rng(777);
    for (int rep = 0; rep < 50; ++rep) {
        const std::vector<double> costs = random_costs(rng, 2 + static_cast<int>(rng.integer(60)));
        const double alpha = rng.uniform() * 0.95;
        const double base = empirical_cvar(costs, alpha);
        const double c = 5.0 * (rng.uniform() - 0.5);
        const double k = 0.1 + 3.0 * rng.uniform();
        std::vector<double> shifted(costs), scaled(costs);
        for (double& v : shifted) v += c;
        for (double& v : scaled) v *= k;
        CHECK(empirical_cvar(shifted, alpha) == doctest::Approx(base + c).epsilon(1e-10));
        CHECK(empirical_cvar(scaled, alpha) == doctest::Approx(k * base).epsilon(1e-10));
    }
    const std::vector<double> costs = random_costs(rng, 37);
    double prev = -1e300;
    for (int i = 0; i < 20; ++i) {
        const double alpha = i / 20.0;
        const double v = empirical_cvar(costs, alpha);
        CHECK(v >= prev - 1e-12);
        prev = v;
    }
}

TEST_CASE("spectral risk composition and lambda linearity") {
    CHECK(spectral_risk({1, 2, 3, 4}, {0.0, 0.5}).total == doctest::Approx(2.5));
    CHECK(spectral_risk({1, 2, 3, 4}, {0.5, 0.5}).total == doctest::Approx(4.25));
    CHECK(spectral_risk({5}, {0.7, 0.95}).total == doctest::Approx(8.5));

    RngStream rng(99);
    const std::vector<double> costs = random_costs(rng, 40);
    const double alpha = 0.9;
    const double cvar = empirical_cvar(costs, alpha);
    double mean = 0.0;
    for (double c : costs) mean += c;
    mean /= static_cast<double>(costs.size());
    for (double lambda : {0.2, 0.9, 1.7}) {
        const RiskEstimate est = spectral_risk(costs, {lambda, alpha});
        CHECK(est.total == doctest::Approx(mean + lambda * cvar).epsilon(1e-12));
        CHECK(est.cvar == doctest::Approx(cvar));
        CHECK(est.total ==
              doctest::Approx(est.expected_cost + lambda * est.cvar).epsilon(1e-12));
    }
}

TEST_CASE("bootstrap_ci: degenerate, definitional quantiles, coverage") {
    RngStream rng(5);
    const std::vector<double> constant(12, 3.25);
    const auto [clo, chi] = bootstrap_ci(constant, BootstrapStat::Median, 50, 0.95, rng);
    CHECK(clo == doctest::Approx(3.25));
    CHECK(chi == doctest::Approx(3.25));

    // definitional: bounds are the type-7 2.5%/97.5% quantiles of the
    // bootstrap statistics, replicated here with an identical stream
    std::vector<double> values;
    for (int i = 1; i <= 30; ++i) values.push_back(static_cast<double>(i * i % 17));
    RngStream a(42), b(42);
    const auto [lo, hi] = bootstrap_ci(values, BootstrapStat::Mean, 400, 0.95, a);
    std::vector<double> stats;
    for (int rep = 0; rep < 400; ++rep) {
        double acc = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i)
            acc += values[b.integer(values.size())];
        stats.push_back(acc / static_cast<double>(values.size()));
    }
    CHECK(lo == doctest::Approx(quantile_type7(stats, 0.025)).epsilon(1e-12));
    CHECK(hi == doctest::Approx(quantile_type7(stats, 0.975)).epsilon(1e-12));

    std::vector<double> seq;
    for (int i = 1; i <= 100; ++i) seq.push_back(i);
    int contained = 0;
    for (int s = 0; s < 50; ++s) {
        RngStream r(1000 + static_cast<std::uint64_t>(s));
        const auto [l, h] = bootstrap_ci(seq, BootstrapStat::Median, 200, 0.95, r);
        if (l <= 50.5 && 50.5 <= h) ++contained;
    }
    CHECK(contained >= 45);
}

TEST_CASE("feasible_project: idempotent, hand case, random invariants") {
    Vec6 ok;
    ok << 0.1, 0.2, 0.0, 0.3, 0.1, 0.5;
    CHECK((feasible_project(ok).x - ok).cwiseAbs().maxCoeff() == 0.0);

    Vec6 over;
    over << 0.5, 0.5, 0, 0, 0, 0.5;
    const Decision d = feasible_project(over);
    CHECK(d.x(0) == doctest::Approx(0.425));
    CHECK(d.x(1) == doctest::Approx(0.425));
    CHECK(d.x(5) == doctest::Approx(0.5));

    RngStream rng(31);
    for (int rep = 0; rep < 200; ++rep) {
        Vec6 raw;
        for (int j = 0; j < 6; ++j) raw(j) = 6.0 * (rng.uniform() - 0.5);
        const Decision p = feasible_project(raw);
        CHECK(is_feasible(p));
        const Decision q = feasible_project(p.x);
        CHECK((q.x - p.x).cwiseAbs().maxCoeff() < 1e-12);
    }
    Vec6 wild;
    wild << -1, 2, 0, 0, 0, 2;
    CHECK(is_feasible(feasible_project(wild)));
    Vec6 bad = Vec6::Zero();
    bad(2) = std::nan("");
    CHECK_THROWS_AS(feasible_project(bad), std::domain_error);
}

TEST_CASE("summarize: type-7 quartiles and conventions") {
    const SummaryStats s = summarize({1, 2, 3, 4});
    CHECK(s.median == doctest::Approx(2.5));
    CHECK(s.q25 == doctest::Approx(1.75));
    CHECK(s.q75 == doctest::Approx(3.25));
    CHECK(summarize({4, 4, 4}).sd == doctest::Approx(0.0));
    const SummaryStats single = summarize({9.0});
    CHECK(single.median == doctest::Approx(9.0));
    CHECK(single.sd == 0.0);
    CHECK_FALSE(single.sd_defined);
    CHECK_THROWS_AS(summarize({}), std::domain_error);
}

TEST_CASE("wilcoxon: exact enumeration fixtures") {
    const WilcoxonResult five =
        wilcoxon_signed_rank({-1.0, -2.0, -0.5, -3.0, -1.5}, Alternative::Less);
    CHECK(five.exact_path);
    CHECK(five.p == doctest::Approx(1.0 / 32.0));

    // symmetric pair: two-sided p = 1 (exact path forced; tied ranks)
    const WilcoxonResult pair =
        wilcoxon_signed_rank({2.0, -2.0}, Alternative::TwoSided, WilcoxonMode::ForceExact);
    CHECK(pair.p == doctest::Approx(1.0));

    const WilcoxonResult none = wilcoxon_signed_rank({0.0, 0.0}, Alternative::Less);
    CHECK(none.degenerate);
    CHECK(none.p == doctest::Approx(1.0));
}

TEST_CASE("wilcoxon: one-sided duality and path agreement at n=30") {
    RngStream rng(64);
    for (int rep = 0; rep < 30; ++rep) {
        std::vector<double> d(static_cast<std::size_t>(4 + rng.integer(8)));
        for (double& v : d) v = rng.normal();
        std::vector<double> neg(d);
        for (double& v : neg) v = -v;
        const double p1 = wilcoxon_signed_rank(d, Alternative::Less, WilcoxonMode::ForceExact).p;
        const double p2 =
            wilcoxon_signed_rank(neg, Alternative::Greater, WilcoxonMode::ForceExact).p;
        CHECK(p1 == doctest::Approx(p2).epsilon(1e-12));
    }
    for (int rep = 0; rep < 25; ++rep) {
        std::vector<double> d(30);
        for (double& v : d) v = rng.normal() + 0.2;
        for (auto alt : {Alternative::Less, Alternative::Greater, Alternative::TwoSided}) {
            const double pe = wilcoxon_signed_rank(d, alt, WilcoxonMode::ForceExact).p;
            const double pn = wilcoxon_signed_rank(d, alt, WilcoxonMode::ForceNormal).p;
            CHECK(std::fabs(pe - pn) < 0.02);
            CHECK(pe >= 0.0);
            CHECK(pe <= 1.0);
        }
    }
}

TEST_CASE("holm adjustment") {
    const std::vector<double> adj = holm_adjust({0.005, 0.01, 0.03, 0.04});
    REQUIRE(adj.size() == 4);
    CHECK(adj[0] == doctest::Approx(0.02));
    CHECK(adj[1] == doctest::Approx(0.03));
    CHECK(adj[2] == doctest::Approx(0.06));
    CHECK(adj[3] == doctest::Approx(0.06));
    CHECK(holm_adjust({0.2})[0] == doctest::Approx(0.2));
    for (double p : holm_adjust({1.0, 1.0, 1.0})) CHECK(p == doctest::Approx(1.0));

    RngStream rng(8);
    for (int rep = 0; rep < 30; ++rep) {
        std::vector<double> ps(static_cast<std::size_t>(1 + rng.integer(8)));
        for (double& p : ps) p = rng.uniform();
        const std::vector<double> out = holm_adjust(ps);
        for (std::size_t i = 0; i < ps.size(); ++i) {
            CHECK(out[i] >= ps[i]);
            CHECK(out[i] <= 1.0);
        }
    }
}

TEST_CASE("rank-biserial and win rate") {
    CHECK(rank_biserial({-1, -4, -2}).r == doctest::Approx(-1.0));
    CHECK(rank_biserial({3, 1, 2}).r == doctest::Approx(1.0));
    CHECK(rank_biserial({1.0, -1.0}).r == doctest::Approx(0.0));
    CHECK(rank_biserial({-3, -2, 1}).r == doctest::Approx(-2.0 / 3.0));
    CHECK(rank_biserial({-3, -2, 1}).magnitude == doctest::Approx(2.0 / 3.0));
    CHECK(rank_biserial({0.0}).degenerate);

    CHECK(win_rate({-1, -2, -3}) == doctest::Approx(1.0));
    CHECK(win_rate({1, 2}) == doctest::Approx(0.0));
    CHECK(win_rate({-1, 1, 0}) == doctest::Approx(0.5));
}

TEST_CASE("key-value config parsing") {
    const KeyValueConfig cfg = KeyValueConfig::from_string(
        "# comment\n"
        "plan.alpha = 0.95\n"
        "acfs.n_a=1200   # trailing comment\n"
        "plan.methods = acfs, gpbo\n"
        "flag = true\n");
    CHECK(cfg.get_double("plan.alpha", 0.0) == doctest::Approx(0.95));
    CHECK(cfg.get_int("acfs.n_a", 0) == 1200);
    CHECK(cfg.get_bool("flag", false));
    CHECK(cfg.get_string("missing", "dflt") == "dflt");
    const auto methods = split_csv(cfg.get_string("plan.methods", ""));
    REQUIRE(methods.size() == 2);
    CHECK(methods[0] == "acfs");
    CHECK(methods[1] == "gpbo");
    CHECK_THROWS(KeyValueConfig::from_string("no equals sign"));
}

TEST_CASE("seed derivation is label-keyed and stable") {
    const std::uint64_t a = derive_seed(1, {hash_label("x"), 3});
    const std::uint64_t b = derive_seed(1, {hash_label("x"), 3});
    const std::uint64_t c = derive_seed(1, {hash_label("y"), 3});
    CHECK(a == b);
    CHECK(a != c);
    RngStream r1(a), r2(a);
    for (int i = 0; i < 100; ++i) CHECK(r1.uniform() == r2.uniform());
}
