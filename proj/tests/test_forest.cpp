#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "acfs/dgp.hpp"
#include "acfs/forest.hpp"
#include "acfs/lhd.hpp"
#include "acfs/rng.hpp"

using namespace acfs;

namespace {

Decision dec(double x1, double x2, double x3, double x4, double x5, double x6) {
    return feasible_project((Vec6() << x1, x2, x3, x4, x5, x6).finished());
}

// x-dependent outcomes with small noise: strong locality signal
TrainingSet informative_data(int n, std::uint64_t seed) {
    TrainingSet data;
    data.x = maximin_lhd_decisions(n, seed, 2);
    data.w.resize(n, 5);
    RngStream rng(derive_seed(seed, {1}));
    for (int i = 0; i < n; ++i) {
        const Vec6& x = data.x[static_cast<std::size_t>(i)].x;
        for (int j = 0; j < 5; ++j)
            data.w(i, j) = 10.0 * x(j) + 4.0 * x(5) + 0.05 * rng.normal();
    }
    return data;
}

TrainingSet noise_data(int n, std::uint64_t seed) {
    TrainingSet data;
    data.x = maximin_lhd_decisions(n, seed, 2);
    data.w.resize(n, 5);
    RngStream rng(derive_seed(seed, {2}));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < 5; ++j) data.w(i, j) = rng.normal();
    return data;
}

Tree leaf_tree(const std::vector<int>& members) {
    Tree t;
    TreeNode root;
    root.members = members;
    t.nodes.push_back(root);
    return t;
}

double weight_mass_within(const Eigen::VectorXd& w, const TrainingSet& data, const Decision& q,
                          double radius) {
    double mass = 0.0;
    for (int i = 0; i < data.size(); ++i)
        if ((data.x[static_cast<std::size_t>(i)].x - q.x).norm() <= radius) mass += w(i);
    return mass;
}

double var_of(const std::vector<double>& v) {
    double m = 0;
    for (double t : v) m += t;
    m /= static_cast<double>(v.size());
    double ss = 0;
    for (double t : v) ss += (t - m) * (t - m);
    return ss / static_cast<double>(v.size() - 1);
}

} // namespace

TEST_CASE("node-size bound: 30 points with min_node 15 gives stumps at most") {
    const TrainingSet data = informative_data(30, 5);
    const ForestModel model = fit_forest(data, 25, 15, 99);
    for (const Tree& t : model.trees) CHECK(t.n_leaves() <= 2);
}

TEST_CASE("forest determinism and full leaf coverage") {
    const TrainingSet data = informative_data(200, 6);
    const ForestModel a = fit_forest(data, 30, 15, 31);
    const ForestModel b = fit_forest(data, 30, 15, 31);
    REQUIRE(a.trees.size() == b.trees.size());
    for (std::size_t k = 0; k < a.trees.size(); ++k) {
        REQUIRE(a.trees[k].nodes.size() == b.trees[k].nodes.size());
        for (std::size_t n = 0; n < a.trees[k].nodes.size(); ++n) {
            CHECK(a.trees[k].nodes[n].feature == b.trees[k].nodes[n].feature);
            CHECK(a.trees[k].nodes[n].threshold == b.trees[k].nodes[n].threshold);
            CHECK(a.trees[k].nodes[n].members == b.trees[k].nodes[n].members);
        }
    }
    // every training index appears in exactly one leaf per tree
    for (const Tree& t : a.trees) {
        std::vector<int> seen(200, 0);
        for (const TreeNode& node : t.nodes) {
            if (node.feature >= 0) continue;
            CHECK_FALSE(node.members.empty());
            for (int i : node.members) ++seen[static_cast<std::size_t>(i)];
        }
        for (int c : seen) CHECK(c == 1);
    }
}

TEST_CASE("degenerate inputs do not break fitting") {
    TrainingSet same;
    same.x.assign(40, dec(0.1, 0.1, 0.1, 0.1, 0.1, 0.5));
    same.w = MatX5::Zero(40, 5);
    const ForestModel model = fit_forest(same, 10, 15, 1);
    for (const Tree& t : model.trees) CHECK(t.n_leaves() == 1);

    TrainingSet constant = informative_data(60, 3);
    constant.w.setConstant(2.5);
    const ForestModel m2 = fit_forest(constant, 10, 15, 1);
    const Eigen::VectorXd w = leaf_weights(m2, dec(0.2, 0.1, 0, 0.05, 0.1, 0.3));
    CHECK(w.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(w.minCoeff() >= 0.0);
}

TEST_CASE("uninformative covariates spread the weights") {
    const int n = 500;
    double avg_max = 0.0;
    int count = 0;
    for (std::uint64_t seed : {11ULL, 12ULL}) {
        const TrainingSet data = noise_data(n, seed);
        const ForestModel model = fit_forest(data, 70, 15, derive_seed(seed, {3}));
        for (int q = 0; q < 10; ++q) {
            RngStream rng(derive_seed(seed, {static_cast<std::uint64_t>(q), 4}));
            Vec6 v;
            for (int d = 0; d < 5; ++d) v(d) = 0.7 * rng.uniform();
            v(5) = rng.uniform();
            avg_max += leaf_weights(model, feasible_project(v)).maxCoeff();
            ++count;
        }
    }
    CHECK(avg_max / count < 5.0 / n);
}

TEST_CASE("hand-constructed leaf weights reproduce the forest weight formula") {
    TrainingSet data = informative_data(10, 7);
    ForestModel single;
    single.n_training = 10;
    single.trees.push_back(leaf_tree({3, 7}));
    const Eigen::VectorXd w = leaf_weights(single, dec(0, 0, 0, 0, 0, 0));
    CHECK(w(3) == doctest::Approx(0.5));
    CHECK(w(7) == doctest::Approx(0.5));
    CHECK(w.sum() == doctest::Approx(1.0));
    CHECK(w(0) == 0.0);

    ForestModel two;
    two.n_training = 10;
    two.trees.push_back(leaf_tree({3}));
    two.trees.push_back(leaf_tree({7}));
    const Eigen::VectorXd w2 = leaf_weights(two, dec(0, 0, 0, 0, 0, 0));
    CHECK(w2(3) == doctest::Approx(0.5));
    CHECK(w2(7) == doctest::Approx(0.5));
}

TEST_CASE("leaf weights live on the simplex for random models and queries") {
    RngStream rng(44);
    for (int rep = 0; rep < 8; ++rep) {
        const TrainingSet data =
            informative_data(150 + 30 * rep, derive_seed(100, {(std::uint64_t)rep}));
        const ForestModel model = fit_forest(data, 20, 15, derive_seed(200, {(std::uint64_t)rep}));
        for (int q = 0; q < 5; ++q) {
            Vec6 v;
            for (int d = 0; d < 5; ++d) v(d) = 0.7 * rng.uniform();
            v(5) = rng.uniform();
            const Eigen::VectorXd w = leaf_weights(model, feasible_project(v));
            CHECK(std::fabs(w.sum() - 1.0) < 1e-12);
            CHECK(w.minCoeff() >= 0.0);
        }
    }
}

TEST_CASE("systematic resampling: exact counts and the deterministic bound") {
    Eigen::VectorXd uniform = Eigen::VectorXd::Constant(20, 1.0 / 20.0);
    const std::vector<int> all = systematic_resample(uniform, 20, 9);
    std::vector<int> counts(20, 0);
    for (int i : all) ++counts[static_cast<std::size_t>(i)];
    for (int c : counts) CHECK(c == 1);

    Eigen::VectorXd point = Eigen::VectorXd::Zero(6);
    point(0) = 1.0;
    for (int i : systematic_resample(point, 11, 3)) CHECK(i == 0);

    Eigen::VectorXd w(3);
    w << 0.5, 0.3, 0.2;
    for (int grid = 0; grid < 50; ++grid) {
        const double u = (grid + 0.5) / 50.0 / 10.0; // in [0, 1/n)
        const std::vector<int> picks = systematic_resample_with_offset(w, 10, u);
        std::vector<int> c(3, 0);
        for (int i : picks) ++c[static_cast<std::size_t>(i)];
        CHECK(c[0] == 5);
        CHECK(c[1] == 3);
        CHECK(c[2] == 2);
    }

    RngStream rng(77);
    for (int rep = 0; rep < 200; ++rep) {
        const int nw = 2 + static_cast<int>(rng.integer(40));
        Eigen::VectorXd rw(nw);
        for (int i = 0; i < nw; ++i) rw(i) = rng.uniform();
        rw /= rw.sum();
        const int n = 1 + static_cast<int>(rng.integer(200));
        const std::vector<int> picks =
            systematic_resample(rw, n, derive_seed(5, {(std::uint64_t)rep}));
        std::vector<int> counts2(static_cast<std::size_t>(nw), 0);
        for (int i : picks) ++counts2[static_cast<std::size_t>(i)];
        for (int i = 0; i < nw; ++i)
            CHECK(std::fabs(counts2[static_cast<std::size_t>(i)] - n * rw(i)) < 1.0);
    }
}

TEST_CASE("silverman bandwidth: rule value, floor, scale linearity") {
    const int n = 1000;
    TrainingSet data;
    data.x = maximin_lhd_decisions(n, 3, 1);
    data.w.resize(n, 5);
    RngStream rng(123);
    for (int i = 0; i < n; ++i) {
        data.w(i, 0) = rng.normal(); // standard normal column
        data.w(i, 1) = 7.25;         // constant column
        data.w(i, 2) = 3.0 * rng.normal();
        data.w(i, 3) = rng.uniform();
        data.w(i, 4) = rng.normal() + 5.0;
    }
    const Vec5 h = silverman_bandwidth(data, 1.0);
    CHECK(h(0) == doctest::Approx(0.9 * std::pow(1000.0, -0.2)).epsilon(0.08));
    CHECK(h(1) == doctest::Approx(1e-8 * (1.0 + 0.0)).epsilon(1e-6));
    const Vec5 h2 = silverman_bandwidth(data, 2.0);
    for (int j = 0; j < 5; ++j) CHECK(h2(j) == doctest::Approx(2.0 * h(j)).epsilon(1e-12));
}

TEST_CASE("cwfs draws: zero bandwidth reproduces training rows exactly") {
    const TrainingSet data = informative_data(120, 9);
    const ForestModel model = fit_forest(data, 30, 15, 2);
    const Decision q = dec(0.2, 0.1, 0.1, 0.05, 0.15, 0.7);
    const MatX5 draws = cwfs_draw(model, data, q, 64, 77, 0.0);
    for (int r = 0; r < draws.rows(); ++r) {
        bool matched = false;
        for (int i = 0; i < data.size() && !matched; ++i)
            matched = (draws.row(r) - data.w.row(i)).cwiseAbs().maxCoeff() == 0.0;
        CHECK(matched);
    }

    // point-mass weights with zero bandwidth replicate a single training row
    ForestModel point;
    point.n_training = data.size();
    point.trees.push_back(leaf_tree({17}));
    const MatX5 rows = cwfs_draw(point, data, q, 16, 5, 0.0);
    for (int r = 0; r < rows.rows(); ++r)
        CHECK((rows.row(r) - data.w.row(17)).cwiseAbs().maxCoeff() == 0.0);

    const MatX5 d1 = cwfs_draw(model, data, q, 32, 123, 1.0);
    const MatX5 d2 = cwfs_draw(model, data, q, 32, 123, 1.0);
    CHECK((d1 - d2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cwfs mean matches the weighted training mean") {
    const TrainingSet data = informative_data(400, 21);
    const ForestModel model = fit_forest(data, 50, 15, 4);
    const Decision q = dec(0.15, 0.2, 0.05, 0.1, 0.1, 0.4);
    const Eigen::VectorXd w = leaf_weights(model, q);
    Vec5 target = Vec5::Zero();
    for (int i = 0; i < data.size(); ++i) target += w(i) * data.w.row(i).transpose();

    const int n = 100000;
    const MatX5 draws = cwfs_draw(model, data, q, n, 8, 1.0);
    for (int j = 0; j < 5; ++j) {
        const double mean = draws.col(j).mean();
        const double sd = std::sqrt((draws.col(j).array() - mean).square().sum() / (n - 1));
        CHECK(std::fabs(mean - target(j)) < 4.0 * sd / std::sqrt(static_cast<double>(n)) + 1e-12);
    }
}

TEST_CASE("surrogate risk: lambda 0 reduces to the mean, seeds reproduce") {
    const TrainingSet data = informative_data(200, 33);
    const ForestModel model = fit_forest(data, 30, 15, 5);
    const Decision q = dec(0.1, 0.1, 0.1, 0.1, 0.1, 0.5);
    const CostFn cost = [](const MatX5& w, const Decision&) {
        std::vector<double> out(static_cast<std::size_t>(w.rows()));
        for (int i = 0; i < w.rows(); ++i) out[static_cast<std::size_t>(i)] = w.row(i).sum();
        return out;
    };
    const RiskEstimate a = surrogate_risk(model, data, q, 500, {0.0, 0.95}, cost, 42);
    CHECK(a.total == doctest::Approx(a.expected_cost));
    const RiskEstimate b = surrogate_risk(model, data, q, 500, {0.0, 0.95}, cost, 42);
    CHECK(a.total == b.total);
}

TEST_CASE("surrogate risk is consistent with the oracle at the training site") {
    // training set drawn at the query itself: uniform weights, small jitter
    const RiskParams params{0.7, 0.95};
    const DgpOracle oracle(DgpSpec::make(DgpKind::Dgp2, params));
    const Decision q = dec(0.15, 0.1, 0.1, 0.1, 0.1, 0.5);
    const int n_train = 3000;
    TrainingSet data;
    data.x.assign(static_cast<std::size_t>(n_train), q);
    const ScenarioMatrix scen = oracle.sample(q, n_train, 404, false);
    data.w = scen.w;
    const ForestModel model = fit_forest(data, 30, 15, 6);
    const CostFn cost = [&oracle](const MatX5& w, const Decision& d) {
        return oracle.cost_at(w, d);
    };
    const int n = 3000;
    const RiskEstimate surr = surrogate_risk(model, data, q, n, params, cost, 11, 0.3);
    const RiskEstimate direct = oracle_evaluate(oracle, q, n, params, 999, false);

    const MatX5 sd_draws = cwfs_draw(model, data, q, n, 11, 0.3);
    const std::vector<double> surr_costs = cost(sd_draws, q);
    const std::vector<double> direct_costs = oracle.cost(oracle.sample(q, n, 999, false), q);
    const double se = std::sqrt(var_of(surr_costs) / n + var_of(direct_costs) / n);
    CHECK(std::fabs(surr.expected_cost - direct.expected_cost) < 4.0 * se);
    CHECK(std::fabs(surr.total - direct.total) / direct.total < 0.1);
}

TEST_CASE("weight locality on strongly x-dependent data") {
    const int n = 1000;
    double mass = 0.0, baseline = 0.0;
    int count = 0;
    for (std::uint64_t seed : {51ULL, 52ULL}) {
        const TrainingSet data = informative_data(n, seed);
        const ForestModel model = fit_forest(data, 70, 15, derive_seed(seed, {9}));
        RngStream rng(derive_seed(seed, {10}));
        for (int q = 0; q < 10; ++q) {
            Vec6 v;
            for (int d = 0; d < 5; ++d) v(d) = 0.7 * rng.uniform();
            v(5) = rng.uniform();
            const Decision query = feasible_project(v);
            const Eigen::VectorXd w = leaf_weights(model, query);
            mass += weight_mass_within(w, data, query, 0.1);
            double frac = 0.0;
            for (int i = 0; i < n; ++i)
                if ((data.x[static_cast<std::size_t>(i)].x - query.x).norm() <= 0.1) frac += 1.0;
            baseline += frac / n;
            ++count;
        }
    }
    CHECK(mass / count >= 2.0 * (baseline / count));
}

TEST_CASE("focused augmentation concentrates weight near the target") {
    const Decision target = dec(0.2, 0.15, 0.1, 0.05, 0.1, 0.6);
    double before_mass = 0.0, after_mass = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        const std::uint64_t seed = derive_seed(808, {static_cast<std::uint64_t>(rep)});
        TrainingSet data = informative_data(1000, seed);
        const ForestModel before = fit_forest(data, 40, 15, derive_seed(seed, {1}));
        before_mass += weight_mass_within(leaf_weights(before, target), data, target, 0.05);

        TrainingSet extra;
        RngStream rng(derive_seed(seed, {2}));
        extra.x.resize(700);
        extra.w.resize(700, 5);
        for (int i = 0; i < 700; ++i) {
            Vec6 v;
            for (int d = 0; d < 6; ++d) v(d) = target.x(d) + 0.025 * rng.normal();
            extra.x[static_cast<std::size_t>(i)] = feasible_project(v);
            const Vec6& x = extra.x[static_cast<std::size_t>(i)].x;
            for (int j = 0; j < 5; ++j)
                extra.w(i, j) = 10.0 * x(j) + 4.0 * x(5) + 0.05 * rng.normal();
        }
        data.append(extra);
        const ForestModel after = fit_forest(data, 40, 15, derive_seed(seed, {3}));
        after_mass += weight_mass_within(leaf_weights(after, target), data, target, 0.05);
    }
    CHECK(after_mass / 20.0 > before_mass / 20.0);
}
