#include "tsr/preprocess.hpp"

#include "tsr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <unordered_map>

namespace tsr {

namespace {

constexpr int dx8[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
constexpr int dy8[8] = {0, -1, -1, -1, 0, 1, 1, 1};

struct Centroid {
    double x = 0, y = 0;
    std::size_t count = 0;
};

Centroid centroid_of(const BinaryShape& s) {
    Centroid c;
    for (int y = 0; y < s.height; ++y)
        for (int x = 0; x < s.width; ++x)
            if (s.at(x, y)) {
                c.x += x;
                c.y += y;
                ++c.count;
            }
    if (c.count) {
        c.x /= double(c.count);
        c.y /= double(c.count);
    }
    return c;
}

// Labels 8-connected foreground components; returns label grid (-1 =
// background) and component sizes.
std::vector<std::size_t> label_components(const BinaryShape& s, std::vector<int>& labels) {
    labels.assign(s.grid.size(), -1);
    std::vector<std::size_t> sizes;
    std::vector<int> stack;
    for (int y = 0; y < s.height; ++y) {
        for (int x = 0; x < s.width; ++x) {
            std::size_t i = std::size_t(y) * s.width + x;
            if (!s.grid[i] || labels[i] >= 0) continue;
            int id = int(sizes.size());
            sizes.push_back(0);
            stack.push_back(int(i));
            labels[i] = id;
            while (!stack.empty()) {
                int j = stack.back();
                stack.pop_back();
                ++sizes[id];
                int jx = j % s.width, jy = j / s.width;
                for (int d = 0; d < 8; ++d) {
                    int nx = jx + dx8[d], ny = jy + dy8[d];
                    if (nx < 0 || nx >= s.width || ny < 0 || ny >= s.height) continue;
                    std::size_t n = std::size_t(ny) * s.width + nx;
                    if (s.grid[n] && labels[n] < 0) {
                        labels[n] = id;
                        stack.push_back(int(n));
                    }
                }
            }
        }
    }
    return sizes;
}

} // namespace

BinaryShape fill_holes(const BinaryShape& shape) {
    if (shape.foreground_count() == 0) throw EmptyShape(shape.id + ": empty shape");

    BinaryShape out = shape;
    const int w = shape.width, h = shape.height;

    // 4-connected background flood from the border.
    std::vector<std::uint8_t> reached(out.grid.size(), 0);
    std::vector<int> stack;
    auto push_bg = [&](int x, int y) {
        std::size_t i = std::size_t(y) * w + x;
        if (!out.grid[i] && !reached[i]) {
            reached[i] = 1;
            stack.push_back(int(i));
        }
    };
    for (int x = 0; x < w; ++x) {
        push_bg(x, 0);
        push_bg(x, h - 1);
    }
    for (int y = 0; y < h; ++y) {
        push_bg(0, y);
        push_bg(w - 1, y);
    }
    while (!stack.empty()) {
        int i = stack.back();
        stack.pop_back();
        int x = i % w, y = i / w;
        if (x > 0) push_bg(x - 1, y);
        if (x < w - 1) push_bg(x + 1, y);
        if (y > 0) push_bg(x, y - 1);
        if (y < h - 1) push_bg(x, y + 1);
    }
    for (std::size_t i = 0; i < out.grid.size(); ++i)
        if (!out.grid[i] && !reached[i]) out.grid[i] = 1;

    // Keep the largest 8-connected component (first one on ties).
    std::vector<int> labels;
    auto sizes = label_components(out, labels);
    if (sizes.size() > 1) {
        int keep = int(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
        for (std::size_t i = 0; i < out.grid.size(); ++i)
            if (out.grid[i] && labels[i] != keep) out.grid[i] = 0;
    }
    return out;
}

int count_components(const BinaryShape& shape) {
    std::vector<int> labels;
    return int(label_components(shape, labels).size());
}

int count_holes(const BinaryShape& shape) {
    const int w = shape.width, h = shape.height;
    // 4-connected background components not touching the border.
    std::vector<int> labels(shape.grid.size(), -1);
    int count = 0;
    std::vector<int> stack;
    for (int sy = 0; sy < h; ++sy) {
        for (int sx = 0; sx < w; ++sx) {
            std::size_t si = std::size_t(sy) * w + sx;
            if (shape.grid[si] || labels[si] >= 0) continue;
            bool border = false;
            labels[si] = 1;
            stack.push_back(int(si));
            while (!stack.empty()) {
                int i = stack.back();
                stack.pop_back();
                int x = i % w, y = i / w;
                if (x == 0 || x == w - 1 || y == 0 || y == h - 1) border = true;
                const int nx[4] = {x - 1, x + 1, x, x};
                const int ny[4] = {y, y, y - 1, y + 1};
                for (int d = 0; d < 4; ++d) {
                    if (nx[d] < 0 || nx[d] >= w || ny[d] < 0 || ny[d] >= h) continue;
                    std::size_t n = std::size_t(ny[d]) * w + nx[d];
                    if (!shape.grid[n] && labels[n] < 0) {
                        labels[n] = 1;
                        stack.push_back(int(n));
                    }
                }
            }
            if (!border) ++count;
        }
    }
    return count;
}

namespace {

Contour trace_boundary(const BinaryShape& s) {
    // Topmost-then-leftmost foreground pixel; its W and N neighbors are
    // background, so W is a valid backtrack.
    int sx = -1, sy = -1;
    for (int y = 0; y < s.height && sx < 0; ++y)
        for (int x = 0; x < s.width; ++x)
            if (s.at(x, y)) {
                sx = x;
                sy = y;
                break;
            }
    if (sx < 0) throw EmptyShape(s.id + ": empty shape");

    Contour contour;
    int cx = sx, cy = sy;
    int back = 0; // direction index of the backtrack neighbor (W)

    // The walk state (pixel, backtrack) evolves deterministically, so the
    // first repeated state closes the boundary loop. Checking only the start
    // state is not enough: a lap can re-enter the start pixel with a
    // different backtrack and never recur, retracing the boundary forever.
    std::unordered_map<int, std::size_t> seen;
    for (;;) {
        const int state = (cy * s.width + cx) * 8 + back;
        auto [it, fresh] = seen.emplace(state, contour.points.size());
        if (!fresh) {
            // Drop the pre-cycle prefix (usually empty); the cycle itself is
            // one clean traversal of the outer boundary.
            contour.points.erase(contour.points.begin(),
                                 contour.points.begin() + std::ptrdiff_t(it->second));
            break;
        }
        contour.points.push_back({double(cx), double(cy)});
        int found = -1;
        for (int k = 1; k <= 8; ++k) {
            int d = (back + k) % 8; // clockwise scan from the backtrack
            int nx = cx + dx8[d], ny = cy + dy8[d];
            if (s.at(nx, ny)) {
                found = d;
                break;
            }
        }
        if (found < 0) break; // isolated pixel
        // New backtrack: the neighbor just before the hit, seen from the new
        // pixel.
        int px = cx + dx8[(found + 7) % 8], py = cy + dy8[(found + 7) % 8];
        cx += dx8[found];
        cy += dy8[found];
        // direction from new current pixel to that background neighbor
        int bx = px - cx, by = py - cy;
        for (int d = 0; d < 8; ++d)
            if (dx8[d] == bx && dy8[d] == by) {
                back = d;
                break;
            }
    }

    return contour;
}

double shoelace(const Contour& c) {
    double a = 0;
    for (std::size_t i = 0; i < c.points.size(); ++i) {
        const Point& p = c.points[i];
        const Point& q = c.points[(i + 1) % c.points.size()];
        a += p.x * q.y - q.x * p.y;
    }
    return a / 2;
}

Contour extract_contour_impl(const BinaryShape& s) {
    Contour contour = trace_boundary(s);
    if (contour.points.size() < 8)
        throw DegenerateShape(s.id + ": fewer than 8 boundary pixels");
    // Counter-clockwise with y up = negative shoelace in raster coordinates.
    if (shoelace(contour) > 0)
        std::reverse(contour.points.begin() + 1, contour.points.end());
    return contour;
}

} // namespace

Contour extract_contour(const BinaryShape& shape) { return extract_contour_impl(shape); }

Contour extract_contour(const NormalizedShape& shape) {
    BinaryShape view;
    view.id = shape.source_id;
    view.width = shape.size;
    view.height = shape.size;
    view.grid = shape.grid;
    return extract_contour_impl(view);
}

Contour smooth_contour(const Contour& contour, double sigma) {
    if (sigma <= 0.0 || contour.points.size() < 3) return contour;
    const int n = int(contour.points.size());
    const int half = std::max(1, int(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(2 * half + 1);
    double sum = 0;
    for (int k = -half; k <= half; ++k) {
        kernel[k + half] = std::exp(-0.5 * (k * k) / (sigma * sigma));
        sum += kernel[k + half];
    }
    for (double& w : kernel) w /= sum;

    Contour out;
    out.points.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = 0, y = 0;
        for (int k = -half; k <= half; ++k) {
            const Point& p = contour.points[((i + k) % n + n) % n];
            x += kernel[k + half] * p.x;
            y += kernel[k + half] * p.y;
        }
        out.points[i] = {x, y};
    }
    return out;
}

SymmetryAxis dominant_symmetry_axis(const BinaryShape& shape) {
    Centroid c = centroid_of(shape);
    if (c.count == 0) throw EmptyShape(shape.id + ": empty shape");

    std::vector<std::pair<int, int>> pixels;
    pixels.reserve(c.count);
    for (int y = 0; y < shape.height; ++y)
        for (int x = 0; x < shape.width; ++x)
            if (shape.at(x, y)) pixels.emplace_back(x, y);

    // Reflections stay within the centroid-centered disk of radius maxdist;
    // one reusable stamp buffer covers it.
    double maxdist = 0;
    for (auto [x, y] : pixels)
        maxdist = std::max(maxdist, std::hypot(x - c.x, y - c.y));
    const int m = int(std::ceil(maxdist)) + 2;
    const int side = 2 * m + 1;
    std::vector<int> stamp(std::size_t(side) * side, -1);

    std::vector<double> scores(180, 0.0);
    for (int deg = 0; deg < 180; ++deg) {
        const double a = deg * std::numbers::pi / 180.0;
        const double ux = std::cos(a), uy = std::sin(a);
        std::size_t inter = 0, mirrored = 0;
        for (auto [px, py] : pixels) {
            const double vx = px - c.x, vy = py - c.y;
            const double dot = vx * ux + vy * uy;
            const double rx = 2 * dot * ux - vx, ry = 2 * dot * uy - vy;
            const int gx = int(std::lround(rx)) + m, gy = int(std::lround(ry)) + m;
            std::size_t cell = std::size_t(gy) * side + gx;
            if (stamp[cell] == deg) continue; // rounding collision
            stamp[cell] = deg;
            ++mirrored;
            const int ox = int(std::lround(c.x + rx)), oy = int(std::lround(c.y + ry));
            if (shape.at(ox, oy)) ++inter;
        }
        const std::size_t uni = pixels.size() + mirrored - inter;
        scores[deg] = uni ? double(inter) / double(uni) : 0.0;
    }

    SymmetryAxis axis;
    int best = 0;
    for (int deg = 1; deg < 180; ++deg)
        if (scores[deg] > scores[best]) best = deg;
    axis.angle_deg = best;
    axis.score = scores[best];
    for (int deg = 0; deg < 180; ++deg) {
        int d = std::abs(deg - best);
        if (std::min(d, 180 - d) > 10) axis.competing_score = std::max(axis.competing_score, scores[deg]);
    }
    return axis;
}

namespace {

BinaryShape rasterize_rigid(const BinaryShape& src, double cx, double cy, double angle_rad,
                            double scale, int raster) {
    // Inverse map: output pixel -> source coordinates.
    const double cosr = std::cos(angle_rad), sinr = std::sin(angle_rad);
    const double ocx = (raster - 1) / 2.0, ocy = (raster - 1) / 2.0;
    BinaryShape out;
    out.id = src.id;
    out.width = raster;
    out.height = raster;
    out.grid.assign(std::size_t(raster) * raster, 0);
    for (int y = 0; y < raster; ++y) {
        for (int x = 0; x < raster; ++x) {
            const double rx = (x - ocx) / scale, ry = (y - ocy) / scale;
            // rotate by -angle
            const double sx = cosr * rx + sinr * ry + cx;
            const double sy = -sinr * rx + cosr * ry + cy;
            const int ix = int(std::lround(sx)), iy = int(std::lround(sy));
            if (src.at(ix, iy)) out.grid[std::size_t(y) * raster + x] = 1;
        }
    }
    return out;
}

} // namespace

NormalizedShape normalize(const BinaryShape& shape, int raster) {
    Centroid c = centroid_of(shape);
    if (c.count == 0) throw EmptyShape(shape.id + ": empty shape");
    if (c.count < 4) throw DegenerateShape(shape.id + ": too few pixels to normalize");

    SymmetryAxis axis = dominant_symmetry_axis(shape);
    double delta = (90.0 - axis.angle_deg) * std::numbers::pi / 180.0;

    // Rotated extents of pixel centers decide scale and the 180-degree flip.
    double cosd = std::cos(delta), sind = std::sin(delta);
    double minx = 1e99, maxx = -1e99, miny = 1e99, maxy = -1e99;
    std::size_t lower = 0, upper = 0;
    for (int y = 0; y < shape.height; ++y)
        for (int x = 0; x < shape.width; ++x)
            if (shape.at(x, y)) {
                const double vx = x - c.x, vy = y - c.y;
                const double rx = cosd * vx - sind * vy;
                const double ry = sind * vx + cosd * vy;
                minx = std::min(minx, rx);
                maxx = std::max(maxx, rx);
                miny = std::min(miny, ry);
                maxy = std::max(maxy, ry);
                if (ry > 0) ++lower;
                else if (ry < 0) ++upper;
            }
    if (upper > lower) {
        delta += std::numbers::pi;
    }

    const int target = int(std::lround(0.9 * raster));
    const double extent = std::max(maxx - minx, maxy - miny);
    if (extent < 1.0) throw DegenerateShape(shape.id + ": degenerate extent");
    double scale = (target - 1) / extent;

    BinaryShape result;
    for (int attempt = 0; attempt < 3; ++attempt) {
        BinaryShape raster_out = rasterize_rigid(shape, c.x, c.y, delta, scale, raster);
        if (raster_out.foreground_count() == 0)
            throw DegenerateShape(shape.id + ": normalization produced an empty raster");
        result = fill_holes(raster_out);
        // Measure the achieved bounding box; nudge the scale if rounding
        // moved it off the target.
        int bminx = raster, bmaxx = -1, bminy = raster, bmaxy = -1;
        for (int y = 0; y < raster; ++y)
            for (int x = 0; x < raster; ++x)
                if (result.at(x, y)) {
                    bminx = std::min(bminx, x);
                    bmaxx = std::max(bmaxx, x);
                    bminy = std::min(bminy, y);
                    bmaxy = std::max(bmaxy, y);
                }
        const int achieved = std::max(bmaxx - bminx, bmaxy - bminy) + 1;
        if (achieved == target) break;
        scale *= double(target) / double(achieved);
    }

    NormalizedShape out;
    out.size = raster;
    out.grid = std::move(result.grid);
    out.source_id = shape.id;
    out.symmetry_axis_angle = axis.angle_deg;
    out.symmetry_score = axis.score;
    return out;
}

} // namespace tsr
