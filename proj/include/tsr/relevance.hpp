#pragma once

#include "tsr/types.hpp"

namespace tsr {

// Indirect assignment: mean of the relevance rows of the K nearest gallery
// shapes (smallest query distance, ties by index), renormalized over
// clusters. `table` is N x M, one probability row per gallery shape. K is
// clamped into [1, N].
std::vector<double> pknn_from_distances(const std::vector<double>& query_distances,
                                        const Matrix& table, int K);

// Joint cost J = -log P_knn - log P_rf with probabilities clamped below at
// `floor` so J stays finite. Natural log.
double relevance_cost(double p_rf, double p_knn, double floor = 1e-6);

struct RelevantClusterSet {
    std::vector<int> clusters;  // ids with cost < epsilon, ascending
    std::vector<double> cost;   // J for every cluster, by id
    bool used_fallback = false;
};

// Thresholds the joint cost over all clusters.
RelevantClusterSet relevant_clusters(const std::vector<double>& p_rf,
                                     const std::vector<double>& p_knn, double epsilon,
                                     double floor = 1e-6);

} // namespace tsr
