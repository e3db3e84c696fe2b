#pragma once

#include "tsr/rng.hpp"
#include "tsr/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace tsr::synth {

// Parametric silhouette built from unions and cutouts of analytic
// primitives. Figures live in their own coordinate frame (x right, y down,
// origin at the figure center, nominal extent ~210 units for a 256 canvas)
// and are rasterized under a rigid placement, so transformed copies of a
// figure carry no resampling error.
struct Primitive {
    enum Kind { Disk, Capsule, TaperedCapsule, Ellipse, Polygon, Blob } kind = Disk;
    double ax = 0, ay = 0, bx = 0, by = 0; // center / endpoints
    double r0 = 0, r1 = 0;                 // radii (r1: taper end, ellipse minor)
    double angle = 0;                      // ellipse orientation, radians
    std::vector<double> poly;              // x0,y0,x1,y1,... closed polygon
    std::vector<double> amp, phase;        // blob harmonics, k = 2,3,...

    bool inside(double x, double y) const;
};

struct Figure {
    std::vector<Primitive> add;
    std::vector<Primitive> sub;

    bool inside(double x, double y) const;
    void center(); // shift so the primitive bounding box is centered on the origin
};

struct Placement {
    double angle_deg = 0.0;
    double scale = 1.0;
    double dx = 0.0;
    double dy = 0.0;
};

// Canonical zero-jitter figure of a family. Families: blob, pear, bar,
// snake, hook, star, gear, cross, tee, horseshoe, bone, fish.
Figure prototype(const std::string& family);

// Jittered family instance (parameter noise only; no placement).
Figure make_family(const std::string& family, Rng& rng);

std::vector<std::string> families();

BinaryShape rasterize(const Figure& figure, const Placement& placement, int canvas,
                      const std::string& id);

// Family instance with seeded jitter and a seeded random placement
// (rotation, mild scale and offset), rasterized onto a canvas raster.
BinaryShape make_instance(const std::string& family, std::uint64_t seed, int canvas = 256);

struct DatasetSpec {
    std::vector<std::string> classes;
    int per_class = 0;
    int canvas = 256;
};

DatasetSpec kimia_like(); // 9 classes x 11 shapes, the Kimia99 layout
DatasetSpec mpeg7_like(); // 10 classes x 20 shapes, an MPEG-7 style subset

// Writes "<class>-<nn>.pgm" files for every class instance. Deterministic in
// (spec, seed).
void write_dataset(const std::filesystem::path& dir, const DatasetSpec& spec, std::uint64_t seed);

} // namespace tsr::synth
