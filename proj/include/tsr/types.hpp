#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace tsr {

// A labeled binary occupancy grid, the unit of ingestion. Row-major,
// grid[y*width + x] != 0 means foreground. The label is ground truth for
// evaluation only; index building never reads it.
struct BinaryShape {
    std::string id;
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> grid;
    std::string label; // empty = unlabeled

    bool at(int x, int y) const {
        return x >= 0 && x < width && y >= 0 && y < height && grid[std::size_t(y) * width + x] != 0;
    }
    void set(int x, int y, bool v) { grid[std::size_t(y) * width + x] = v ? 1 : 0; }
    std::size_t foreground_count() const {
        std::size_t n = 0;
        for (auto v : grid) n += v != 0;
        return n;
    }
};

struct Gallery {
    std::vector<BinaryShape> shapes;
    std::string source;
    std::string labeling;
};

// Shape after translation/rotation/scale normalization onto a fixed R x R
// raster. The symmetry axis fields come from the sweep that aligned it.
struct NormalizedShape {
    int size = 0; // raster side R
    std::vector<std::uint8_t> grid;
    std::string source_id;
    double symmetry_axis_angle = 0.0; // degrees in [0, 180)
    double symmetry_score = 0.0;      // [0, 1]

    bool at(int x, int y) const {
        return x >= 0 && x < size && y >= 0 && y < size && grid[std::size_t(y) * size + x] != 0;
    }
    void set(int x, int y, bool v) { grid[std::size_t(y) * size + x] = v ? 1 : 0; }
    std::size_t foreground_count() const {
        std::size_t n = 0;
        for (auto v : grid) n += v != 0;
        return n;
    }
};

struct Point {
    double x = 0.0;
    double y = 0.0;
};

// Closed polyline around the outer boundary, counter-clockwise with y up
// (i.e. negative shoelace area in raster coordinates where y grows down).
struct Contour {
    std::vector<Point> points;

    double perimeter() const;
};

// Dense row-major matrix of doubles. Small on purpose; heavy linear algebra
// goes through Eigen internally.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c, double fill = 0.0) : rows(r), cols(c), data(std::size_t(r) * c, fill) {}

    double& operator()(int r, int c) { return data[std::size_t(r) * cols + c]; }
    double operator()(int r, int c) const { return data[std::size_t(r) * cols + c]; }

    bool operator==(const Matrix& o) const = default;
};

using GlobalFeature = std::array<double, 13>;

} // namespace tsr
