#ifndef ACFS_FOREST_HPP
#define ACFS_FOREST_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "acfs/decision.hpp"
#include "acfs/risk.hpp"

namespace acfs {

struct TrainingSet {
    std::vector<Decision> x;
    MatX5 w; // one 5-vector outcome per decision

    int size() const { return static_cast<int>(x.size()); }
    void append(const TrainingSet& other);
};

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<int> members; // training indices routed to this leaf
};

struct Tree {
    std::vector<TreeNode> nodes; // nodes[0] is the root

    int leaf_of(const Vec6& q) const;
    int n_leaves() const;
};

struct ForestModel {
    std::vector<Tree> trees;
    int n_training = 0;
    int min_node = 15;
};

/// Multi-target regression forest over decision space. Each tree is grown on
/// a 50% without-replacement subsample with 3 random split candidates per
/// node; the split criterion is the summed within-node variance reduction
/// across the five outcome components. After growth every training point is
/// routed down the tree, so leaf membership covers the full training set.
ForestModel fit_forest(const TrainingSet& data, int n_trees, int min_node, std::uint64_t seed);

// w_i(x) = (1/K) sum_k 1[x_i in leaf_k(x)] / |leaf_k(x)|; lies on the simplex.
Eigen::VectorXd leaf_weights(const ForestModel& model, const Decision& x);

// Low-variance resampling from a single uniform offset in [0, 1/n).
std::vector<int> systematic_resample(const Eigen::VectorXd& weights, int n, std::uint64_t seed);
std::vector<int> systematic_resample_with_offset(const Eigen::VectorXd& weights, int n, double u);

// h_j = scale * 0.9 * min(sd_j, IQR_j/1.34) * N^(-1/5), floored away from zero.
Vec5 silverman_bandwidth(const TrainingSet& data, double scale);

// Synthetic conditional draws: W~_r = W_{I_r} + h .* Z_r with indices from
// systematic resampling of the forest weights and Gaussian jitter.
MatX5 cwfs_draw(const ForestModel& model, const TrainingSet& data, const Decision& x, int n,
                std::uint64_t seed, double bandwidth_scale = 1.0);

using CostFn = std::function<std::vector<double>(const MatX5&, const Decision&)>;

// Forest-surrogate spectral risk at x from n synthetic draws.
RiskEstimate surrogate_risk(const ForestModel& model, const TrainingSet& data, const Decision& x,
                            int n, const RiskParams& params, const CostFn& cost_fn,
                            std::uint64_t seed, double bandwidth_scale = 1.0);

} // namespace acfs

#endif
