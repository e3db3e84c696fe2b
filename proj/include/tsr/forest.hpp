#pragma once

#include "tsr/types.hpp"

#include <cstdint>

namespace tsr {

struct ForestConfig {
    int trees_per_group = 100;
    int max_depth = 12;
    int min_leaf = 1;

    bool operator==(const ForestConfig&) const = default;
};

// Flat node array; node 0 is the root. Internal nodes carry (feature,
// threshold, children); leaves carry the voted cluster id.
struct TreeNode {
    int feature = -1; // -1 = leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int leaf_class = -1;

    bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
    std::vector<TreeNode> nodes;

    int predict(const GlobalFeature& x) const;
    bool operator==(const DecisionTree&) const = default;
};

// One forest per feature subset. Group 0 sees all 13 dimensions, the others
// one feature family each, so no single dominating feature can steer every
// vote.
struct ForestEnsemble {
    struct Group {
        std::vector<int> features; // dimensions this group's trees may split on
        std::vector<DecisionTree> trees;

        bool operator==(const Group&) const = default;
    };
    std::vector<Group> groups;
    int cluster_count = 0;
    std::uint64_t seed = 0;

    bool operator==(const ForestEnsemble&) const = default;
};

// {all 13} + {f_s} + {f_w} + {f_g}
std::vector<std::vector<int>> default_feature_groups();

// Trains trees_per_group trees per group, each on a bootstrap sample, with
// sqrt(|group|) candidate features per node and best Gini split (ties by
// lower feature index, then lower threshold). One RNG substream per
// (group, tree), so results are independent of scheduling.
ForestEnsemble train_forest(const std::vector<GlobalFeature>& features,
                            const std::vector<int>& labels, int cluster_count,
                            const ForestConfig& config, std::uint64_t seed,
                            const std::vector<std::vector<int>>& groups = default_feature_groups());

// Normalized leaf votes over clusters (sum rule across all trees of all
// groups): entry k = v_k / sum_j v_j.
std::vector<double> predict_prf(const ForestEnsemble& ensemble, const GlobalFeature& x);

} // namespace tsr
