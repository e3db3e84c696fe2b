#include "tsr/localfeat.hpp"

#include "tsr/errors.hpp"
#include "tsr/parallel.hpp"
#include "tsr/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace tsr {

namespace {

bool near_foreground(const NormalizedShape& s, int x, int y) {
    // Rounded pixel or a 4-neighbor: tolerates boundary rounding without
    // bridging real gaps.
    if (s.at(x, y)) return true;
    return s.at(x - 1, y) || s.at(x + 1, y) || s.at(x, y - 1) || s.at(x, y + 1);
}

bool segment_inside(const NormalizedShape& s, const Point& a, const Point& b) {
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    const int steps = std::max(1, int(std::ceil(len / 0.5)));
    for (int k = 0; k <= steps; ++k) {
        const double t = double(k) / steps;
        const int x = int(std::lround(a.x + t * (b.x - a.x)));
        const int y = int(std::lround(a.y + t * (b.y - a.y)));
        if (!near_foreground(s, x, y)) return false;
    }
    return true;
}

} // namespace

ContourSamples sample_contour(const Contour& contour, int n) {
    const std::size_t m = contour.points.size();
    if (m < 4 || contour.perimeter() < double(n))
        throw TooFewContourPixels("contour too short to take " + std::to_string(n) + " samples");

    // Canonical start: topmost-then-leftmost vertex.
    std::size_t start = 0;
    for (std::size_t i = 1; i < m; ++i) {
        const Point& p = contour.points[i];
        const Point& q = contour.points[start];
        if (p.y < q.y || (p.y == q.y && p.x < q.x)) start = i;
    }

    // Cumulative arc length from the start vertex, walking stored order.
    std::vector<double> cum(m + 1, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const Point& a = contour.points[(start + i) % m];
        const Point& b = contour.points[(start + i + 1) % m];
        cum[i + 1] = cum[i] + std::hypot(b.x - a.x, b.y - a.y);
    }
    const double total = cum[m];

    ContourSamples out;
    out.points.resize(n);
    std::size_t seg = 0;
    for (int k = 0; k < n; ++k) {
        const double target = total * k / n;
        while (seg + 1 < m && cum[seg + 1] < target) ++seg;
        const Point& a = contour.points[(start + seg) % m];
        const Point& b = contour.points[(start + seg + 1) % m];
        const double span = cum[seg + 1] - cum[seg];
        const double t = span > 0 ? (target - cum[seg]) / span : 0.0;
        out.points[k] = {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
    }

    out.tangents.resize(n);
    for (int k = 0; k < n; ++k) {
        const Point& prev = out.points[(k + n - 1) % n];
        const Point& next = out.points[(k + 1) % n];
        double tx = next.x - prev.x, ty = next.y - prev.y;
        const double norm = std::hypot(tx, ty);
        if (norm > 0) {
            tx /= norm;
            ty /= norm;
        } else {
            tx = 1;
            ty = 0;
        }
        out.tangents[k] = {tx, ty};
    }
    return out;
}

InnerGeometry inner_distances(const NormalizedShape& shape, const ContourSamples& samples) {
    const int n = int(samples.points.size());
    const double inf = std::numeric_limits<double>::infinity();

    // Samples on the smoothed contour can fall a whisker outside the raster
    // foreground; snap each to the nearest foreground pixel for testing.
    std::vector<Point> anchor(samples.points.begin(), samples.points.end());
    for (Point& p : anchor) {
        int px = int(std::lround(p.x)), py = int(std::lround(p.y));
        if (shape.at(px, py)) continue;
        bool found = false;
        for (int r = 1; r <= 4 && !found; ++r)
            for (int dy = -r; dy <= r && !found; ++dy)
                for (int dx = -r; dx <= r && !found; ++dx)
                    if (shape.at(px + dx, py + dy)) {
                        p = {double(px + dx), double(py + dy)};
                        found = true;
                    }
        if (!found) throw DisconnectedInterior(shape.source_id + ": contour sample off foreground");
    }

    Matrix dist(n, n, inf);
    std::vector<int> next(std::size_t(n) * n, -1);
    auto nxt = [&](int i, int j) -> int& { return next[std::size_t(i) * n + j]; };

    for (int i = 0; i < n; ++i) {
        dist(i, i) = 0;
        nxt(i, i) = i;
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (segment_inside(shape, anchor[i], anchor[j])) {
                const double d = std::hypot(anchor[j].x - anchor[i].x, anchor[j].y - anchor[i].y);
                dist(i, j) = dist(j, i) = d;
                nxt(i, j) = j;
                nxt(j, i) = i;
            }
    // Consecutive samples are always connected through the boundary strip;
    // weight them by contour arc length so the graph cannot disconnect.
    double perimeter = 0;
    for (int i = 0; i < n; ++i) {
        const Point& a = samples.points[i];
        const Point& b = samples.points[(i + 1) % n];
        perimeter += std::hypot(b.x - a.x, b.y - a.y);
    }
    const double arc = perimeter / n;
    for (int i = 0; i < n; ++i) {
        const int j = (i + 1) % n;
        if (arc < dist(i, j)) {
            dist(i, j) = dist(j, i) = arc;
            nxt(i, j) = j;
            nxt(j, i) = i;
        }
    }

    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i) {
            if (dist(i, k) == inf) continue;
            for (int j = 0; j < n; ++j) {
                const double through = dist(i, k) + dist(k, j);
                if (through < dist(i, j)) {
                    dist(i, j) = through;
                    nxt(i, j) = nxt(i, k);
                }
            }
        }

    InnerGeometry geom;
    geom.dist = std::move(dist);
    geom.angle = Matrix(n, n, 0.0);
    const double two_pi = 2 * std::numbers::pi;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const int h = nxt(i, j);
            if (h < 0) throw DisconnectedInterior(shape.source_id + ": interior not connected");
            const double ex = anchor[h].x - anchor[i].x, ey = anchor[h].y - anchor[i].y;
            const Point& t = samples.tangents[i];
            // rotation from tangent to first path edge, wrapped to [0, 2pi)
            double a = std::atan2(t.x * ey - t.y * ex, t.x * ex + t.y * ey);
            if (a < 0) a += two_pi;
            geom.angle(i, j) = a;
        }
    return geom;
}

LocalDescriptor build_descriptor(const InnerGeometry& geom, const DescriptorParams& params) {
    const int n = geom.dist.rows;
    LocalDescriptor d;
    d.n = n;
    d.bins = params.bins();
    d.hist.assign(std::size_t(n) * d.bins, 0.0);

    double mean = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) mean += geom.dist(i, j);
    mean /= double(n) * (n - 1);
    if (!(mean > 0)) throw DegenerateShape("degenerate inner distances");

    // log2-spaced distance bins over [mean/8, 2*mean]; outliers land in the
    // edge bins.
    const double lo = -3.0, hi = 1.0;
    const double width = (hi - lo) / params.dist_bins;
    const double abin = 2 * std::numbers::pi / params.angle_bins;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const double r = std::log2(geom.dist(i, j) / mean);
            int db = int(std::floor((r - lo) / width));
            db = std::clamp(db, 0, params.dist_bins - 1);
            int ab = int(std::floor(geom.angle(i, j) / abin));
            ab = std::clamp(ab, 0, params.angle_bins - 1);
            d.hist[std::size_t(i) * d.bins + db * params.angle_bins + ab] += 1.0;
        }
    }
    const double norm = 1.0 / (n - 1);
    for (double& v : d.hist) v *= norm;
    return d;
}

LocalDescriptor idsc_descriptor(const NormalizedShape& shape, const DescriptorParams& params) {
    Contour contour = smooth_contour(extract_contour(shape), params.smooth_sigma);
    ContourSamples samples = sample_contour(contour, params.samples);
    InnerGeometry geom = inner_distances(shape, samples);
    return build_descriptor(geom, params);
}

namespace {

// Order-preserving alignment of rows [0..n) of a against rows shifted by s of
// b, with per-point skip penalty tau. cost(i,j) indexes the precomputed
// chi-square matrix.
double dp_align(const std::vector<double>& cost, int n, int shift, double tau, bool transpose,
                std::vector<double>& prev, std::vector<double>& cur) {
    auto c = [&](int i, int j) {
        const int jj = (j + shift) % n;
        return transpose ? cost[std::size_t(jj) * n + i] : cost[std::size_t(i) * n + jj];
    };
    prev.assign(n + 1, 0.0);
    for (int j = 1; j <= n; ++j) prev[j] = prev[j - 1] + tau;
    for (int i = 1; i <= n; ++i) {
        cur.assign(n + 1, 0.0);
        cur[0] = prev[0] + tau;
        for (int j = 1; j <= n; ++j) {
            double best = prev[j - 1] + c(i - 1, j - 1);
            best = std::min(best, prev[j] + tau);
            best = std::min(best, cur[j - 1] + tau);
            cur[j] = best;
        }
        std::swap(prev, cur);
    }
    return prev[n];
}

} // namespace

double idsc_distance(const LocalDescriptor& a, const LocalDescriptor& b,
                     const DescriptorParams& params) {
    if (a.n != b.n || a.bins != b.bins)
        throw DimensionMismatch("descriptor shapes differ: " + std::to_string(a.n) + "x" +
                                std::to_string(a.bins) + " vs " + std::to_string(b.n) + "x" +
                                std::to_string(b.bins));
    const int n = a.n, bins = a.bins;

    std::vector<double> cost(std::size_t(n) * n);
    for (int i = 0; i < n; ++i) {
        const double* ra = &a.hist[std::size_t(i) * bins];
        for (int j = 0; j < n; ++j) {
            const double* rb = &b.hist[std::size_t(j) * bins];
            double x = 0;
            for (int k = 0; k < bins; ++k) {
                const double s = ra[k] + rb[k];
                if (s > 0) {
                    const double d = ra[k] - rb[k];
                    x += d * d / s;
                }
            }
            cost[std::size_t(i) * n + j] = 0.5 * x;
        }
    }

    std::vector<double> prev, cur;
    double ab = std::numeric_limits<double>::infinity();
    double ba = std::numeric_limits<double>::infinity();
    for (int k = 0; k < params.shifts; ++k) {
        const int s = int(std::lround(double(k) * n / params.shifts)) % n;
        ab = std::min(ab, dp_align(cost, n, s, params.skip_penalty, false, prev, cur));
        ba = std::min(ba, dp_align(cost, n, s, params.skip_penalty, true, prev, cur));
    }
    return 0.5 * (ab + ba);
}

Matrix distance_matrix(const std::vector<LocalDescriptor>& descriptors,
                       const DescriptorParams& params) {
    const int n = int(descriptors.size());
    Matrix m(n, n, 0.0);
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(std::size_t(n) * (n - 1) / 2);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    std::vector<double> values(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t k) {
        values[k] = idsc_distance(descriptors[pairs[k].first], descriptors[pairs[k].second], params);
    });
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        m(pairs[k].first, pairs[k].second) = values[k];
        m(pairs[k].second, pairs[k].first) = values[k];
    }
    return m;
}

std::vector<double> distances_to_gallery(const LocalDescriptor& query,
                                         const std::vector<LocalDescriptor>& gallery,
                                         const DescriptorParams& params) {
    std::vector<double> out(gallery.size());
    parallel_for(gallery.size(),
                 [&](std::size_t i) { out[i] = idsc_distance(query, gallery[i], params); });
    return out;
}

} // namespace tsr
