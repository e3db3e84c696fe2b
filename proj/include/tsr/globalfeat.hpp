#pragma once

#include "tsr/types.hpp"

#include <array>

namespace tsr {

// One-pixel-wide skeleton raster. Same side length as the normalized shape
// it was thinned from.
struct Skeleton {
    int size = 0;
    std::vector<std::uint8_t> grid;

    bool at(int x, int y) const {
        return x >= 0 && x < size && y >= 0 && y < size && grid[std::size_t(y) * size + x] != 0;
    }
    void set(int x, int y, bool v) { grid[std::size_t(y) * size + x] = v ? 1 : 0; }
    std::size_t pixel_count() const {
        std::size_t n = 0;
        for (auto v : grid) n += v != 0;
        return n;
    }
};

// 4-D skeleton feature: counts of the four salient point types.
struct SkeletonFeature {
    int turning = 0;
    int ends = 0;
    int t_junctions = 0;
    int cross_junctions = 0;

    bool operator==(const SkeletonFeature&) const = default;
};

// 5-D Haar-like filter responses, each in [0, 1].
struct WaveletFeature {
    std::array<double, 5> responses{};
};

// 4-D geometric feature.
struct GeometricFeature {
    double aspect_ratio = 0.0; // min(w,h)/max(w,h) of the bounding box
    double circularity = 0.0;  // 4*pi*A/P^2
    double symmetry = 0.0;     // dominant-axis mirror overlap score
    double solidity = 0.0;     // A / convex hull area
};

// Gallery-wide min/max of the four skeleton counts, used to scale them into
// [0, 1] so all 13 dimensions are comparable for tree splits. Persisted with
// the index so queries are scaled identically.
struct FeatureScaling {
    std::array<double, 4> min{0, 0, 0, 0};
    std::array<double, 4> max{1, 1, 1, 1};

    bool operator==(const FeatureScaling&) const = default;
};

Skeleton skeletonize(const NormalizedShape& shape);
Skeleton prune_skeleton(const Skeleton& skel, double min_branch_frac = 0.05);
SkeletonFeature salient_points(const Skeleton& skel, double turn_angle_deg = 45.0);
WaveletFeature wavelet_features(const NormalizedShape& shape);
GeometricFeature geometric_features(const NormalizedShape& shape, const Contour& smoothed_contour);

FeatureScaling compute_scaling(const std::vector<SkeletonFeature>& gallery);

// f_s (min-max scaled) ++ f_w ++ f_g, 13 reals.
GlobalFeature global_feature(const SkeletonFeature& fs, const WaveletFeature& fw,
                             const GeometricFeature& fg, const FeatureScaling& scaling);

// Convenience: the whole extraction chain for one normalized shape.
struct RawFeatures {
    SkeletonFeature skeleton;
    WaveletFeature wavelet;
    GeometricFeature geometric;
};
RawFeatures extract_raw_features(const NormalizedShape& shape, const Contour& smoothed_contour,
                                 double min_branch_frac = 0.05, double turn_angle_deg = 45.0);

} // namespace tsr
