#pragma once

#include "tsr/types.hpp"

namespace tsr {

// Everything that parameterizes descriptor extraction and matching. Stored
// in the index so a query is binned and matched exactly like the gallery.
struct DescriptorParams {
    int samples = 100;        // contour points n
    int dist_bins = 8;        // log-spaced inner-distance bins
    int angle_bins = 12;      // inner-angle bins
    double skip_penalty = 0.3; // DP per-point skip cost tau
    int shifts = 8;           // circular shifts tried during matching
    double smooth_sigma = 2.0; // contour smoothing before sampling

    int bins() const { return dist_bins * angle_bins; }
    bool operator==(const DescriptorParams&) const = default;
};

// n points equally spaced by arc length, counter-clockwise, starting at the
// topmost-then-leftmost contour point. tangents are unit vectors.
struct ContourSamples {
    std::vector<Point> points;
    std::vector<Point> tangents;
};

// Inner distances and inner angles between all sample pairs.
struct InnerGeometry {
    Matrix dist;  // n x n shortest interior path lengths
    Matrix angle; // n x n angle of the first path edge relative to the tangent, [0, 2pi)
};

// Per-shape set of inner-distance shape context histograms; row p is the
// L1-normalized (dist_bins x angle_bins) histogram of point p.
struct LocalDescriptor {
    int n = 0;
    int bins = 0;
    std::vector<double> hist; // n x bins row-major

    double at(int row, int bin) const { return hist[std::size_t(row) * bins + bin]; }
    bool operator==(const LocalDescriptor&) const = default;
};

ContourSamples sample_contour(const Contour& contour, int n = 100);

InnerGeometry inner_distances(const NormalizedShape& shape, const ContourSamples& samples);

LocalDescriptor build_descriptor(const InnerGeometry& geom, const DescriptorParams& params = {});

// Full chain for one normalized shape: contour -> smooth -> sample ->
// inner geometry -> histograms.
LocalDescriptor idsc_descriptor(const NormalizedShape& shape, const DescriptorParams& params = {});

// Chi-square point costs, order-preserving DP alignment with skip penalty,
// minimum over circular shifts, symmetrized.
double idsc_distance(const LocalDescriptor& a, const LocalDescriptor& b,
                     const DescriptorParams& params = {});

// Full symmetric pairwise matrix, zero diagonal. Parallel over pairs.
Matrix distance_matrix(const std::vector<LocalDescriptor>& descriptors,
                       const DescriptorParams& params = {});

// Distances from one query descriptor to every gallery descriptor.
std::vector<double> distances_to_gallery(const LocalDescriptor& query,
                                         const std::vector<LocalDescriptor>& gallery,
                                         const DescriptorParams& params = {});

} // namespace tsr
