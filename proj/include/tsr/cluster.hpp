#pragma once

#include "tsr/types.hpp"

#include <cstdint>
#include <utility>

namespace tsr {

struct ClusterModel {
    int cluster_count = 0;
    std::vector<int> assignment; // shape index -> cluster id
    std::vector<int> medoids;    // cluster id -> shape index
    // The ceil(|cluster|/2) members closest to each medoid, with their
    // cluster label. This is the forest training set.
    std::vector<std::pair<int, int>> training; // (shape index, cluster label)

    bool operator==(const ClusterModel&) const = default;
};

// Ng-Jordan-Weiss spectral clustering on a pairwise distance matrix with
// local-scaling affinity (sigma_i = distance to the 7th nearest neighbor).
// k-means with k-means++ init, `restarts` runs under one master seed, best
// within-cluster sum kept (ties by restart index). Deterministic.
ClusterModel spectral_cluster(const Matrix& dist, int M, std::uint64_t seed, int restarts = 50);

// Recomputes medoids and the training subset for a given assignment.
// Medoid = member minimizing summed in-cluster distance; training members are
// the N_i = ceil(|cluster|/2) smallest-distance-to-medoid members, ties by
// shape index.
std::vector<std::pair<int, int>> select_training(const ClusterModel& model, const Matrix& dist);

} // namespace tsr
