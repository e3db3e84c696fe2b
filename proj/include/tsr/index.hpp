#pragma once

#include "tsr/cluster.hpp"
#include "tsr/forest.hpp"
#include "tsr/globalfeat.hpp"
#include "tsr/localfeat.hpp"
#include "tsr/types.hpp"

#include <cstdint>

namespace tsr {

// Every knob of the offline build, persisted with the index so any query or
// benchmark against it is reproducible.
struct BuildConfig {
    int cluster_count = 0;     // M (required)
    int raster = 256;          // normalization raster R
    DescriptorParams descriptor;
    ForestConfig forest;
    int knn_count = 0;         // K; 0 = resolve to round(1.5 * N / M) at build time
    double epsilon = 7.0;      // relevance threshold
    double prob_floor = 1e-6;  // probability clamp inside the cost
    int kernel_k = 7;          // affinity bandwidth neighbor
    int knn_w = 10;            // diffusion locality
    int diffusion_iters = 20;
    std::uint64_t seed = 0;
    int binarize_threshold = 128;
    double prune_branch_frac = 0.05;
    double turn_angle_deg = 45.0;

    bool operator==(const BuildConfig&) const = default;
};

// The persisted offline artifact: everything a query needs.
struct RetrievalIndex {
    BuildConfig config;
    std::vector<std::string> ids;
    std::vector<std::string> labels; // evaluation only, may be empty strings
    FeatureScaling scaling;
    std::vector<GlobalFeature> global_features;
    std::vector<LocalDescriptor> descriptors;
    Matrix distances;  // N x N local-feature distances
    ClusterModel clusters;
    ForestEnsemble forest;
    Matrix relevance;  // N x M, row i = P_rf of gallery shape i

    int gallery_size() const { return int(ids.size()); }
    bool operator==(const RetrievalIndex&) const = default;
};

} // namespace tsr
