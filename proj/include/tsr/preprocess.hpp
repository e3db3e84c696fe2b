#pragma once

#include "tsr/types.hpp"

namespace tsr {

// Flood-fills the background from the frame border and turns every unreached
// background pixel into foreground, then keeps only the largest 8-connected
// foreground component. Idempotent.
BinaryShape fill_holes(const BinaryShape& shape);

// Moore-neighbor boundary trace of the outer contour, counter-clockwise.
// Requires a hole-free single-component shape with at least 8 boundary pixels.
Contour extract_contour(const BinaryShape& shape);
Contour extract_contour(const NormalizedShape& shape);

// Circular Gaussian smoothing of the x(t), y(t) sequences. sigma is measured
// in contour samples (~pixels for a traced boundary). Point count preserved.
Contour smooth_contour(const Contour& contour, double sigma = 2.0);

struct SymmetryAxis {
    double angle_deg = 0.0; // [0, 180)
    double score = 0.0;     // Jaccard overlap of shape and its mirror image
    // Best score found at least 10 degrees away from the winner. A small
    // (score - competing_score) gap flags shapes with no clear dominant axis
    // (disk, square, star), whose normalized pose is not reproducible.
    double competing_score = 0.0;

    double gap() const { return score - competing_score; }
};

// Sweeps the mirror axis through the centroid over [0, 180) in 1 degree steps
// and returns the argmax of the Jaccard overlap score, ties to the smaller
// angle.
SymmetryAxis dominant_symmetry_axis(const BinaryShape& shape);

// Rotates the dominant symmetry axis to vertical, centers the centroid,
// scales the larger bounding-box side to round(0.9 * raster) and resamples
// with nearest neighbor. The leftover 180-degree flip is resolved by putting
// the larger foreground mass in the lower half. Holes introduced by
// resampling are re-filled and only the largest component is kept.
NormalizedShape normalize(const BinaryShape& shape, int raster = 256);

// Test/diagnostic helpers shared across modules.
int count_holes(const BinaryShape& shape);
int count_components(const BinaryShape& shape); // 8-connected foreground

} // namespace tsr
