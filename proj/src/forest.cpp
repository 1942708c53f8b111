#include "acfs/forest.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "acfs/rng.hpp"
#include "acfs/stats.hpp"

namespace acfs {

void TrainingSet::append(const TrainingSet& other) {
    const int n0 = size(), n1 = other.size();
    x.insert(x.end(), other.x.begin(), other.x.end());
    MatX5 merged(n0 + n1, 5);
    if (n0 > 0) merged.topRows(n0) = w;
    if (n1 > 0) merged.bottomRows(n1) = other.w;
    w = std::move(merged);
}

int Tree::leaf_of(const Vec6& q) const {
    int node = 0;
    while (nodes[node].feature >= 0)
        node = q(nodes[node].feature) <= nodes[node].threshold ? nodes[node].left
                                                               : nodes[node].right;
    return node;
}

int Tree::n_leaves() const {
    int count = 0;
    for (const TreeNode& n : nodes)
        if (n.feature < 0) ++count;
    return count;
}

namespace {

constexpr int kDim = 6;
constexpr int kMtry = 3;
constexpr double kSubsampleFraction = 0.5;

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

// Best split among `features` by summed variance reduction over the five
// outcome components; children must keep at least min_node points.
SplitChoice best_split(const TrainingSet& data, const std::vector<int>& idx,
                       const std::array<int, kMtry>& features, int min_node) {
    SplitChoice best;
    const int n = static_cast<int>(idx.size());
    std::vector<int> order(idx);
    for (int f : features) {
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            const double va = data.x[a].x(f), vb = data.x[b].x(f);
            return va < vb || (va == vb && a < b);
        });
        // prefix sums of outcomes
        Vec5 sum_left = Vec5::Zero();
        Vec5 sum_total = Vec5::Zero();
        double sq_left = 0.0, sq_total = 0.0;
        for (int i : order) {
            sum_total += data.w.row(i).transpose();
            sq_total += data.w.row(i).squaredNorm();
        }
        for (int cut = 1; cut < n; ++cut) {
            const int i = order[cut - 1];
            sum_left += data.w.row(i).transpose();
            sq_left += data.w.row(i).squaredNorm();
            if (cut < min_node || n - cut < min_node) continue;
            const double lo = data.x[order[cut - 1]].x(f);
            const double hi = data.x[order[cut]].x(f);
            if (lo == hi) continue; // cannot separate equal values
            const double nl = cut, nr = n - cut;
            const Vec5 sum_right = sum_total - sum_left;
            const double sq_right = sq_total - sq_left;
            const double sse_left = sq_left - sum_left.squaredNorm() / nl;
            const double sse_right = sq_right - sum_right.squaredNorm() / nr;
            const double sse_total = sq_total - sum_total.squaredNorm() / n;
            const double gain = sse_total - sse_left - sse_right;
            if (gain > best.gain + 1e-15) {
                best.found = true;
                best.feature = f;
                best.threshold = 0.5 * (lo + hi);
                best.gain = gain;
            }
        }
    }
    return best;
}

void grow(Tree& tree, int node, std::vector<int> idx, const TrainingSet& data, int min_node,
          RngStream& rng) {
    // split-candidate features: kMtry distinct draws
    std::array<int, kDim> pool{};
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < kMtry; ++i) {
        const int j = i + static_cast<int>(rng.integer(kDim - i));
        std::swap(pool[i], pool[j]);
    }
    std::array<int, kMtry> features{pool[0], pool[1], pool[2]};

    SplitChoice split;
    if (static_cast<int>(idx.size()) >= 2 * min_node)
        split = best_split(data, idx, features, min_node);
    if (!split.found) {
        tree.nodes[node].feature = -1;
        return;
    }
    std::vector<int> left, right;
    for (int i : idx)
        (data.x[i].x(split.feature) <= split.threshold ? left : right).push_back(i);
    tree.nodes[node].feature = split.feature;
    tree.nodes[node].threshold = split.threshold;
    tree.nodes[node].left = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[node].right = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    grow(tree, tree.nodes[node].left, std::move(left), data, min_node, rng);
    grow(tree, tree.nodes[node].right, std::move(right), data, min_node, rng);
}

} // namespace

ForestModel fit_forest(const TrainingSet& data, int n_trees, int min_node, std::uint64_t seed) {
    const int n = data.size();
    if (n < 2) throw std::domain_error("fit_forest: need at least 2 training points");
    if (n_trees < 1 || min_node < 1) throw std::domain_error("fit_forest: bad hyperparameters");
    ForestModel model;
    model.n_training = n;
    model.min_node = min_node;
    model.trees.resize(n_trees);
    for (int k = 0; k < n_trees; ++k) {
        RngStream rng(derive_seed(seed, {static_cast<std::uint64_t>(k), hash_label("tree")}));
        // 50% without-replacement subsample
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        const int m = std::max(2, static_cast<int>(n * kSubsampleFraction));
        for (int i = 0; i < m; ++i) {
            const int j = i + static_cast<int>(rng.integer(n - i));
            std::swap(perm[i], perm[j]);
        }
        std::vector<int> sub(perm.begin(), perm.begin() + m);
        std::sort(sub.begin(), sub.end());

        Tree& tree = model.trees[k];
        tree.nodes.emplace_back();
        grow(tree, 0, std::move(sub), data, min_node, rng);
        // route the full training set; leaves therefore hold every index once
        for (int i = 0; i < n; ++i) tree.nodes[tree.leaf_of(data.x[i].x)].members.push_back(i);
    }
    return model;
}

Eigen::VectorXd leaf_weights(const ForestModel& model, const Decision& x) {
    if (model.trees.empty()) throw std::domain_error("leaf_weights: model not fitted");
    Eigen::VectorXd w = Eigen::VectorXd::Zero(model.n_training);
    const double k_inv = 1.0 / static_cast<double>(model.trees.size());
    for (const Tree& tree : model.trees) {
        const TreeNode& leaf = tree.nodes[tree.leaf_of(x.x)];
        if (leaf.members.empty()) continue;
        const double share = k_inv / static_cast<double>(leaf.members.size());
        for (int i : leaf.members) w(i) += share;
    }
    return w;
}

std::vector<int> systematic_resample_with_offset(const Eigen::VectorXd& weights, int n, double u) {
    const int nw = static_cast<int>(weights.size());
    if (nw == 0 || n <= 0) throw std::domain_error("systematic_resample: empty input");
    std::vector<int> out(n);
    int i = 0;
    double cum = weights(0);
    const double step = 1.0 / n;
    for (int m = 0; m < n; ++m) {
        const double target = u + m * step;
        while (cum < target && i + 1 < nw) cum += weights(++i);
        out[m] = i;
    }
    return out;
}

std::vector<int> systematic_resample(const Eigen::VectorXd& weights, int n, std::uint64_t seed) {
    RngStream rng(seed);
    return systematic_resample_with_offset(weights, n, rng.uniform() / n);
}

Vec5 silverman_bandwidth(const TrainingSet& data, double scale) {
    const int n = data.size();
    if (n < 2) throw std::domain_error("silverman_bandwidth: need at least 2 points");
    Vec5 h;
    std::vector<double> col(static_cast<std::size_t>(n));
    for (int j = 0; j < 5; ++j) {
        for (int i = 0; i < n; ++i) col[static_cast<std::size_t>(i)] = data.w(i, j);
        const double mean = std::accumulate(col.begin(), col.end(), 0.0) / n;
        double ss = 0.0;
        for (double v : col) ss += (v - mean) * (v - mean);
        const double sd = std::sqrt(ss / (n - 1));
        std::sort(col.begin(), col.end());
        const double iqr = quantile_type7_sorted(col, 0.75) - quantile_type7_sorted(col, 0.25);
        const double spread = std::min(sd, iqr / 1.34);
        const double floor = 1e-8 * (1.0 + std::fabs(sd));
        h(j) = std::max(scale * 0.9 * spread * std::pow(static_cast<double>(n), -0.2), floor);
    }
    return h;
}

MatX5 cwfs_draw(const ForestModel& model, const TrainingSet& data, const Decision& x, int n,
                std::uint64_t seed, double bandwidth_scale) {
    const Eigen::VectorXd w = leaf_weights(model, x);
    // scale 0 disables jitter entirely; draws are exact training rows
    const Vec5 h = bandwidth_scale == 0.0 ? Vec5::Zero().eval()
                                          : silverman_bandwidth(data, bandwidth_scale);
    const std::vector<int> picks =
        systematic_resample(w, n, derive_seed(seed, {hash_label("resample")}));
    RngStream jitter(derive_seed(seed, {hash_label("jitter")}));
    MatX5 out(n, 5);
    for (int r = 0; r < n; ++r)
        for (int j = 0; j < 5; ++j) out(r, j) = data.w(picks[r], j) + h(j) * jitter.normal();
    return out;
}

RiskEstimate surrogate_risk(const ForestModel& model, const TrainingSet& data, const Decision& x,
                            int n, const RiskParams& params, const CostFn& cost_fn,
                            std::uint64_t seed, double bandwidth_scale) {
    const MatX5 draws = cwfs_draw(model, data, x, n, seed, bandwidth_scale);
    return spectral_risk(cost_fn(draws, x), params);
}

} // namespace acfs
