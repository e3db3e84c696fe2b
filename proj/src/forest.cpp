#include "tsr/forest.hpp"

#include "tsr/errors.hpp"
#include "tsr/parallel.hpp"
#include "tsr/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tsr {

int DecisionTree::predict(const GlobalFeature& x) const {
    int i = 0;
    while (nodes[i].feature >= 0)
        i = (x[nodes[i].feature] <= nodes[i].threshold) ? nodes[i].left : nodes[i].right;
    return nodes[i].leaf_class;
}

std::vector<std::vector<int>> default_feature_groups() {
    std::vector<std::vector<int>> g(4);
    for (int i = 0; i < 13; ++i) g[0].push_back(i);
    for (int i = 0; i < 4; ++i) g[1].push_back(i);   // skeleton counts
    for (int i = 4; i < 9; ++i) g[2].push_back(i);   // wavelet responses
    for (int i = 9; i < 13; ++i) g[3].push_back(i);  // geometric features
    return g;
}

namespace {

struct TreeBuilder {
    const std::vector<GlobalFeature>& x;
    const std::vector<int>& y;
    int classes;
    const ForestConfig& cfg;
    const std::vector<int>& mask;
    int mtry;
    Rng rng;
    std::vector<TreeNode> nodes;

    int make_leaf(const std::vector<int>& samples) {
        std::vector<int> votes(classes, 0);
        for (int s : samples) ++votes[y[s]];
        int best = 0;
        for (int c = 1; c < classes; ++c)
            if (votes[c] > votes[best]) best = c;
        TreeNode leaf;
        leaf.leaf_class = best;
        nodes.push_back(leaf);
        return int(nodes.size()) - 1;
    }

    int build(std::vector<int>& samples, int depth) {
        bool pure = true;
        for (std::size_t i = 1; i < samples.size(); ++i)
            if (y[samples[i]] != y[samples[0]]) {
                pure = false;
                break;
            }
        if (pure || depth >= cfg.max_depth || int(samples.size()) < 2 * cfg.min_leaf)
            return make_leaf(samples);

        // mtry candidate features without replacement, evaluated in
        // ascending order so Gini ties resolve to the lower feature index
        std::vector<int> cand(mask);
        for (int i = 0; i < mtry; ++i) {
            const std::size_t j = i + rng.below(std::uint64_t(cand.size() - i));
            std::swap(cand[i], cand[j]);
        }
        cand.resize(mtry);
        std::sort(cand.begin(), cand.end());

        const int n = int(samples.size());
        int best_feature = -1;
        double best_threshold = 0;
        double best_score = std::numeric_limits<double>::infinity();

        std::vector<std::pair<double, int>> vals(n);
        std::vector<int> left_counts(classes), total_counts(classes);
        for (int f : cand) {
            for (int i = 0; i < n; ++i) vals[i] = {x[samples[i]][f], y[samples[i]]};
            std::sort(vals.begin(), vals.end());
            if (vals.front().first == vals.back().first) continue; // constant feature

            std::fill(left_counts.begin(), left_counts.end(), 0);
            std::fill(total_counts.begin(), total_counts.end(), 0);
            for (int i = 0; i < n; ++i) ++total_counts[vals[i].second];

            for (int i = 0; i + 1 < n; ++i) {
                ++left_counts[vals[i].second];
                if (vals[i].first == vals[i + 1].first) continue;
                const int nl = i + 1, nr = n - nl;
                if (nl < cfg.min_leaf || nr < cfg.min_leaf) continue;
                double gl = 1.0, gr = 1.0;
                for (int c = 0; c < classes; ++c) {
                    const double pl = double(left_counts[c]) / nl;
                    const double pr = double(total_counts[c] - left_counts[c]) / nr;
                    gl -= pl * pl;
                    gr -= pr * pr;
                }
                const double score = nl * gl + nr * gr;
                if (score < best_score) {
                    best_score = score;
                    best_feature = f;
                    best_threshold = 0.5 * (vals[i].first + vals[i + 1].first);
                }
            }
        }
        if (best_feature < 0) return make_leaf(samples);

        std::vector<int> left, right;
        for (int s : samples)
            (x[s][best_feature] <= best_threshold ? left : right).push_back(s);
        if (left.empty() || right.empty()) return make_leaf(samples);

        const int self = int(nodes.size());
        nodes.emplace_back();
        nodes[self].feature = best_feature;
        nodes[self].threshold = best_threshold;
        const int l = build(left, depth + 1);
        const int r = build(right, depth + 1);
        nodes[self].left = l;
        nodes[self].right = r;
        return self;
    }
};

DecisionTree train_tree(const std::vector<GlobalFeature>& x, const std::vector<int>& y, int classes,
                        const ForestConfig& cfg, const std::vector<int>& mask, Rng rng) {
    const int m = int(x.size());
    std::vector<int> samples(m);
    for (int i = 0; i < m; ++i) samples[i] = int(rng.below(std::uint64_t(m)));

    TreeBuilder b{x, y, classes, cfg, mask,
                  std::max(1, int(std::lround(std::sqrt(double(mask.size()))))), rng,
                  {}};
    b.nodes.reserve(64);
    b.build(samples, 0);
    DecisionTree t;
    t.nodes = std::move(b.nodes);
    return t;
}

} // namespace

ForestEnsemble train_forest(const std::vector<GlobalFeature>& features,
                            const std::vector<int>& labels, int cluster_count,
                            const ForestConfig& config, std::uint64_t seed,
                            const std::vector<std::vector<int>>& groups) {
    if (features.size() != labels.size())
        throw DimensionMismatch("feature and label counts differ");
    int distinct = 0;
    std::vector<bool> seen(std::size_t(std::max(cluster_count, 1)), false);
    for (int l : labels)
        if (l >= 0 && l < cluster_count && !seen[l]) {
            seen[l] = true;
            ++distinct;
        }
    if (distinct < 2)
        throw SingleClassTraining("training set covers " + std::to_string(distinct) +
                                  " cluster labels; need at least 2");
    for (const auto& f : features)
        for (double v : f)
            if (!std::isfinite(v)) throw NonFiniteFeature("non-finite training feature");

    ForestEnsemble ens;
    ens.cluster_count = cluster_count;
    ens.seed = seed;
    ens.groups.resize(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
        ens.groups[g].features = groups[g];
        ens.groups[g].trees.resize(config.trees_per_group);
    }

    const std::size_t total = groups.size() * std::size_t(config.trees_per_group);
    parallel_for(total, [&](std::size_t task) {
        const std::size_t g = task / config.trees_per_group;
        const std::size_t t = task % config.trees_per_group;
        Rng rng = Rng::substream(seed, (std::uint64_t(g) << 32) | t);
        ens.groups[g].trees[t] =
            train_tree(features, labels, cluster_count, config, groups[g], rng);
    });
    return ens;
}

std::vector<double> predict_prf(const ForestEnsemble& ensemble, const GlobalFeature& x) {
    std::vector<double> votes(ensemble.cluster_count, 0.0);
    for (const auto& g : ensemble.groups)
        for (const auto& t : g.trees) ++votes[t.predict(x)];
    double total = 0;
    for (double v : votes) total += v;
    if (total > 0)
        for (double& v : votes) v /= total;
    return votes;
}

} // namespace tsr
