#include "tsr/globalfeat.hpp"

#include "tsr/errors.hpp"
#include "tsr/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace tsr {

namespace {

// Ring of the 8 neighbors in clockwise order (y down).
constexpr int rx8[8] = {0, 1, 1, 1, 0, -1, -1, -1};
constexpr int ry8[8] = {-1, -1, 0, 1, 1, 1, 0, -1};

// Rutovitz crossing number: transitions 0->1 around the neighbor ring.
// 1 = end, 2 = path, >=3 = junction. Robust against thick corners, where the
// raw neighbor count overshoots.
int crossing_number(const Skeleton& s, int x, int y) {
    int c = 0;
    for (int i = 0; i < 8; ++i) {
        bool a = s.at(x + rx8[i], y + ry8[i]);
        bool b = s.at(x + rx8[(i + 1) % 8], y + ry8[(i + 1) % 8]);
        if (!a && b) ++c;
    }
    return c;
}

int neighbor_count(const Skeleton& s, int x, int y) {
    int c = 0;
    for (int i = 0; i < 8; ++i) c += s.at(x + rx8[i], y + ry8[i]);
    return c;
}

struct PixelRef {
    int x, y;
};

// One step along a path: the first unvisited neighbor in ring order.
bool step_path(const Skeleton& s, const std::vector<PixelRef>& visited, int x, int y, int& nx,
               int& ny) {
    for (int i = 0; i < 8; ++i) {
        int cx = x + rx8[i], cy = y + ry8[i];
        if (!s.at(cx, cy)) continue;
        bool seen = false;
        for (const auto& v : visited)
            if (v.x == cx && v.y == cy) {
                seen = true;
                break;
            }
        if (!seen) {
            nx = cx;
            ny = cy;
            return true;
        }
    }
    return false;
}

} // namespace

Skeleton skeletonize(const NormalizedShape& shape) {
    if (shape.foreground_count() == 0)
        throw DegenerateShape(shape.source_id + ": cannot skeletonize an empty shape");

    Skeleton s;
    s.size = shape.size;
    s.grid = shape.grid;
    for (auto& v : s.grid) v = v ? 1 : 0;

    // Zhang-Suen: alternate the two sub-iterations until a full pass deletes
    // nothing.
    std::vector<std::size_t> kill;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int phase = 0; phase < 2; ++phase) {
            kill.clear();
            for (int y = 0; y < s.size; ++y) {
                for (int x = 0; x < s.size; ++x) {
                    if (!s.at(x, y)) continue;
                    // P2..P9 clockwise from north
                    bool p[8];
                    for (int i = 0; i < 8; ++i) p[i] = s.at(x + rx8[i], y + ry8[i]);
                    int b = 0;
                    for (int i = 0; i < 8; ++i) b += p[i];
                    if (b < 2 || b > 6) continue;
                    int a = 0;
                    for (int i = 0; i < 8; ++i)
                        if (!p[i] && p[(i + 1) % 8]) ++a;
                    if (a != 1) continue;
                    // p[0]=N p[2]=E p[4]=S p[6]=W
                    if (phase == 0) {
                        if ((p[0] && p[2] && p[4]) || (p[2] && p[4] && p[6])) continue;
                    } else {
                        if ((p[0] && p[2] && p[6]) || (p[0] && p[4] && p[6])) continue;
                    }
                    kill.push_back(std::size_t(y) * s.size + x);
                }
            }
            for (auto i : kill) s.grid[i] = 0;
            if (!kill.empty()) changed = true;
        }
    }
    return s;
}

Skeleton prune_skeleton(const Skeleton& skel, double min_branch_frac) {
    Skeleton s = skel;
    const double limit = min_branch_frac * s.size;

    bool changed = true;
    while (changed) {
        changed = false;
        std::vector<std::size_t> kill;
        for (int y = 0; y < s.size; ++y) {
            for (int x = 0; x < s.size; ++x) {
                if (!s.at(x, y) || crossing_number(s, x, y) != 1) continue;
                // Walk from the end toward the nearest junction.
                std::vector<PixelRef> branch{{x, y}};
                bool to_junction = false;
                int cx = x, cy = y;
                while (double(branch.size()) < limit) {
                    int nx, ny;
                    if (!step_path(s, branch, cx, cy, nx, ny)) break; // open path, no junction
                    if (crossing_number(s, nx, ny) >= 3) {
                        to_junction = true;
                        break;
                    }
                    branch.push_back({nx, ny});
                    cx = nx;
                    cy = ny;
                }
                if (to_junction && double(branch.size()) < limit)
                    for (const auto& p : branch) kill.push_back(std::size_t(p.y) * s.size + p.x);
            }
        }
        for (auto i : kill)
            if (s.grid[i]) {
                s.grid[i] = 0;
                changed = true;
            }
    }
    return s;
}

SkeletonFeature salient_points(const Skeleton& skel, double turn_angle_deg) {
    SkeletonFeature f;
    const int n = skel.size;

    // Junction pixels, clustered; each cluster is one vertex classified by
    // how many branches leave it.
    std::vector<std::uint8_t> junction(skel.grid.size(), 0);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
            if (skel.at(x, y)) {
                int cn = crossing_number(skel, x, y);
                if (cn >= 3) junction[std::size_t(y) * n + x] = 1;
                else if (cn == 1 || (cn == 0 && neighbor_count(skel, x, y) == 1)) ++f.ends;
            }

    std::vector<int> cluster(skel.grid.size(), -1);
    std::vector<int> stack;
    int clusters = 0;
    for (std::size_t i = 0; i < junction.size(); ++i) {
        if (!junction[i] || cluster[i] >= 0) continue;
        int id = clusters++;
        cluster[i] = id;
        stack.push_back(int(i));
        while (!stack.empty()) {
            int j = stack.back();
            stack.pop_back();
            int jx = j % n, jy = j / n;
            for (int d = 0; d < 8; ++d) {
                int ax = jx + rx8[d], ay = jy + ry8[d];
                if (ax < 0 || ax >= n || ay < 0 || ay >= n) continue;
                std::size_t k = std::size_t(ay) * n + ax;
                if (junction[k] && cluster[k] < 0) {
                    cluster[k] = id;
                    stack.push_back(int(k));
                }
            }
        }
    }

    if (clusters > 0) {
        // Branch count per cluster: connected components of the skeleton
        // minus all junction pixels, counted once per adjacent cluster.
        // 4-connected labeling on purpose: around a removed junction pixel
        // the arms touch each other diagonally, and 8-connectivity would
        // merge them into one branch.
        std::vector<int> comp(skel.grid.size(), -1);
        int comps = 0;
        for (std::size_t i = 0; i < skel.grid.size(); ++i) {
            if (!skel.grid[i] || junction[i] || comp[i] >= 0) continue;
            int id = comps++;
            comp[i] = id;
            stack.push_back(int(i));
            while (!stack.empty()) {
                int j = stack.back();
                stack.pop_back();
                int jx = j % n, jy = j / n;
                constexpr int fx[4] = {1, -1, 0, 0}, fy[4] = {0, 0, 1, -1};
                for (int d = 0; d < 4; ++d) {
                    int ax = jx + fx[d], ay = jy + fy[d];
                    if (ax < 0 || ax >= n || ay < 0 || ay >= n) continue;
                    std::size_t k = std::size_t(ay) * n + ax;
                    if (skel.grid[k] && !junction[k] && comp[k] < 0) {
                        comp[k] = id;
                        stack.push_back(int(k));
                    }
                }
            }
        }
        // pairs (cluster, component) seen
        std::vector<std::vector<int>> seen(clusters);
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x) {
                std::size_t i = std::size_t(y) * n + x;
                if (!junction[i]) continue;
                for (int d = 0; d < 8; ++d) {
                    int ax = x + rx8[d], ay = y + ry8[d];
                    if (ax < 0 || ax >= n || ay < 0 || ay >= n) continue;
                    std::size_t k = std::size_t(ay) * n + ax;
                    if (comp[k] < 0) continue;
                    auto& v = seen[cluster[i]];
                    if (std::find(v.begin(), v.end(), comp[k]) == v.end()) v.push_back(comp[k]);
                }
            }
        for (int c = 0; c < clusters; ++c) {
            if (int(seen[c].size()) >= 4) ++f.cross_junctions;
            else if (int(seen[c].size()) == 3) ++f.t_junctions;
            // <=2: degenerate cluster (tight bend), not a junction vertex
        }
    }

    // Turning points: path points whose two 5-pixel arms bend by more than
    // the threshold. Measured on branch chains whose coordinates are first
    // smoothed along the chain: thinning leaves staircase jogs on oblique
    // strokes that a raw pixel walk cannot tell from a genuine bend, while
    // smoothing flattens the jogs and keeps real corners. A consecutive run
    // of qualifying points is one turning point.
    const double max_cos = std::cos((180.0 - turn_angle_deg) * std::numbers::pi / 180.0);

    // Junction neighborhoods are cut out before chain extraction: a pixel
    // next to a junction sees the crossing branch as its own arm, and
    // removing the ring splits the chains cleanly at every vertex.
    std::vector<std::uint8_t> avoid(junction);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            if (!junction[std::size_t(y) * n + x]) continue;
            for (int d = 0; d < 8; ++d) {
                int ax = x + rx8[d], ay = y + ry8[d];
                if (ax >= 0 && ax < n && ay >= 0 && ay < n) avoid[std::size_t(ay) * n + ax] = 1;
            }
        }

    std::vector<int> chain(skel.grid.size(), -1);
    int nchains = 0;
    for (std::size_t i = 0; i < skel.grid.size(); ++i) {
        if (!skel.grid[i] || avoid[i] || chain[i] >= 0) continue;
        int id = nchains++;
        chain[i] = id;
        stack.push_back(int(i));
        while (!stack.empty()) {
            int j = stack.back();
            stack.pop_back();
            int jx = j % n, jy = j / n;
            for (int d = 0; d < 8; ++d) {
                int ax = jx + rx8[d], ay = jy + ry8[d];
                if (ax < 0 || ax >= n || ay < 0 || ay >= n) continue;
                std::size_t k = std::size_t(ay) * n + ax;
                if (skel.grid[k] && !avoid[k] && chain[k] < 0) {
                    chain[k] = id;
                    stack.push_back(int(k));
                }
            }
        }
    }
    std::vector<std::vector<int>> members(nchains);
    for (std::size_t i = 0; i < chain.size(); ++i)
        if (chain[i] >= 0) members[chain[i]].push_back(int(i));

    // Axis neighbors before diagonals, so a diagonal shortcut pixel beside a
    // staircase step does not derail the walk.
    constexpr int pref[8] = {0, 2, 4, 6, 1, 3, 5, 7};
    std::vector<std::uint8_t> walked(skel.grid.size(), 0);

    for (int c = 0; c < nchains; ++c) {
        const auto& px = members[c];
        if (px.size() < 11) continue; // no point has two full arms
        int start = px[0];
        bool open = false;
        for (int j : px) {
            int jx = j % n, jy = j / n, deg = 0;
            for (int d = 0; d < 8; ++d) {
                int ax = jx + rx8[d], ay = jy + ry8[d];
                if (ax < 0 || ax >= n || ay < 0 || ay >= n) continue;
                if (chain[std::size_t(ay) * n + ax] == c) ++deg;
            }
            if (deg <= 1) {
                start = j;
                open = true;
                break;
            }
        }
        std::vector<PixelRef> path;
        for (int cur = start; cur >= 0;) {
            walked[cur] = 1;
            path.push_back({cur % n, cur / n});
            int cx = cur % n, cy = cur / n;
            cur = -1;
            for (int t = 0; t < 8 && cur < 0; ++t) {
                int ax = cx + rx8[pref[t]], ay = cy + ry8[pref[t]];
                if (ax < 0 || ax >= n || ay < 0 || ay >= n) continue;
                std::size_t k = std::size_t(ay) * n + ax;
                if (chain[k] == c && !walked[k]) cur = int(k);
            }
        }
        for (int j : px) walked[j] = 0;
        const int m = int(path.size());
        if (m < 11) continue;
        const bool loop = !open && std::abs(path.back().x - path.front().x) <= 1 &&
                          std::abs(path.back().y - path.front().y) <= 1;

        // Gaussian smoothing along the chain, truncated at open ends.
        constexpr int half = 4;
        constexpr double sigma = 1.5;
        double w[2 * half + 1];
        for (int t = -half; t <= half; ++t)
            w[t + half] = std::exp(-double(t * t) / (2.0 * sigma * sigma));
        std::vector<double> xs(m), ys(m);
        for (int i = 0; i < m; ++i) {
            double ax = 0, ay = 0, aw = 0;
            for (int t = -half; t <= half; ++t) {
                int j = i + t;
                if (loop)
                    j = (j % m + m) % m;
                else if (j < 0 || j >= m)
                    continue;
                ax += w[t + half] * path[j].x;
                ay += w[t + half] * path[j].y;
                aw += w[t + half];
            }
            xs[i] = ax / aw;
            ys[i] = ay / aw;
        }

        std::vector<std::uint8_t> mark(m, 0);
        for (int i = 0; i < m; ++i) {
            if (!loop && (i < 5 || i >= m - 5)) continue;
            double a0x = 0, a0y = 0, a1x = 0, a1y = 0;
            for (int t = 1; t <= 5; ++t) {
                int jb = i - t, jf = i + t;
                if (loop) {
                    jb = (jb % m + m) % m;
                    jf %= m;
                }
                a0x += xs[jb] - xs[i];
                a0y += ys[jb] - ys[i];
                a1x += xs[jf] - xs[i];
                a1y += ys[jf] - ys[i];
            }
            double dot = a0x * a1x + a0y * a1y;
            double n0 = std::hypot(a0x, a0y), n1 = std::hypot(a1x, a1y);
            if (n0 == 0 || n1 == 0) continue;
            // straight: arms anti-parallel (cos = -1); bend when the angle
            // between them drops below 180 - threshold
            if (dot / (n0 * n1) > max_cos) mark[i] = 1;
        }
        int runs = 0;
        for (int i = 0; i < m; ++i)
            if (mark[i] && (i == 0 || !mark[i - 1])) ++runs;
        if (loop && runs > 1 && mark[0] && mark[m - 1]) --runs; // run wraps the seam
        f.turning += runs;
    }
    return f;
}

WaveletFeature wavelet_features(const NormalizedShape& shape) {
    const int R = shape.size;
    const int half = R / 2;
    const int b1 = R / 3, b2 = (2 * R) / 3;

    // signed sums for: 2-band vertical, 2-band horizontal, 3-band vertical,
    // 3-band horizontal, 2x2 checkerboard
    double acc[5] = {0, 0, 0, 0, 0};
    std::size_t area = 0;
    for (int y = 0; y < R; ++y) {
        for (int x = 0; x < R; ++x) {
            if (!shape.grid[std::size_t(y) * R + x]) continue;
            ++area;
            acc[0] += (x < half) ? 1 : -1;
            acc[1] += (y < half) ? 1 : -1;
            acc[2] += (x < b1 || x >= b2) ? 1 : -1;
            acc[3] += (y < b1 || y >= b2) ? 1 : -1;
            acc[4] += ((x < half) == (y < half)) ? 1 : -1;
        }
    }
    WaveletFeature f;
    if (area == 0) return f;
    for (int i = 0; i < 5; ++i) f.responses[i] = std::abs(acc[i]) / double(area);
    return f;
}

GeometricFeature geometric_features(const NormalizedShape& shape, const Contour& smoothed_contour) {
    GeometricFeature g;
    const int R = shape.size;

    int minx = R, maxx = -1, miny = R, maxy = -1;
    std::size_t area = 0;
    for (int y = 0; y < R; ++y)
        for (int x = 0; x < R; ++x)
            if (shape.grid[std::size_t(y) * R + x]) {
                ++area;
                minx = std::min(minx, x);
                maxx = std::max(maxx, x);
                miny = std::min(miny, y);
                maxy = std::max(maxy, y);
            }
    if (area == 0) throw EmptyShape(shape.source_id + ": empty shape");
    const double w = maxx - minx + 1, h = maxy - miny + 1;
    g.aspect_ratio = std::min(w, h) / std::max(w, h);

    const double p = smoothed_contour.perimeter();
    if (p <= 0) throw DegenerateShape(shape.source_id + ": zero-length contour");
    g.circularity = 4.0 * std::numbers::pi * double(area) / (p * p);

    g.symmetry = shape.symmetry_score;

    // Convex hull over pixel corners, not centers: the hull then contains
    // every foreground pixel entirely, so solidity <= 1 holds exactly.
    Contour raw = extract_contour(shape);
    std::vector<Point> pts;
    pts.reserve(raw.points.size() * 4);
    for (const Point& q : raw.points)
        for (double dx : {-0.5, 0.5})
            for (double dy : {-0.5, 0.5}) pts.push_back({q.x + dx, q.y + dy});
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const Point& a, const Point& b) { return a.x == b.x && a.y == b.y; }),
              pts.end());
    auto cross = [](const Point& o, const Point& a, const Point& b) {
        return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    };
    std::vector<Point> hull(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    for (std::size_t i = pts.size(), lower = k + 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k > 1 ? k - 1 : k);
    double hull_area = 0;
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const Point& a = hull[i];
        const Point& b = hull[(i + 1) % hull.size()];
        hull_area += a.x * b.y - b.x * a.y;
    }
    hull_area = std::abs(hull_area) / 2;
    if (hull_area <= 0) throw DegenerateShape(shape.source_id + ": degenerate convex hull");
    g.solidity = double(area) / hull_area;
    return g;
}

FeatureScaling compute_scaling(const std::vector<SkeletonFeature>& gallery) {
    FeatureScaling s;
    if (gallery.empty()) return s;
    auto dim = [](const SkeletonFeature& f, int i) {
        switch (i) {
        case 0: return f.turning;
        case 1: return f.ends;
        case 2: return f.t_junctions;
        default: return f.cross_junctions;
        }
    };
    for (int i = 0; i < 4; ++i) {
        double lo = dim(gallery[0], i), hi = lo;
        for (const auto& f : gallery) {
            lo = std::min(lo, double(dim(f, i)));
            hi = std::max(hi, double(dim(f, i)));
        }
        if (hi <= lo) hi = lo + 1; // constant dimension scales to 0
        s.min[i] = lo;
        s.max[i] = hi;
    }
    return s;
}

GlobalFeature global_feature(const SkeletonFeature& fs, const WaveletFeature& fw,
                             const GeometricFeature& fg, const FeatureScaling& scaling) {
    GlobalFeature v{};
    const double raw[4] = {double(fs.turning), double(fs.ends), double(fs.t_junctions),
                           double(fs.cross_junctions)};
    for (int i = 0; i < 4; ++i) {
        double d = scaling.max[i] - scaling.min[i];
        v[i] = std::clamp((raw[i] - scaling.min[i]) / d, 0.0, 1.0);
    }
    for (int i = 0; i < 5; ++i) v[4 + i] = fw.responses[i];
    v[9] = fg.aspect_ratio;
    v[10] = fg.circularity;
    v[11] = fg.symmetry;
    v[12] = fg.solidity;
    for (double x : v)
        if (!std::isfinite(x)) throw NonFiniteFeature("global feature has a non-finite component");
    return v;
}

RawFeatures extract_raw_features(const NormalizedShape& shape, const Contour& smoothed_contour,
                                 double min_branch_frac, double turn_angle_deg) {
    RawFeatures r;
    Skeleton skel = prune_skeleton(skeletonize(shape), min_branch_frac);
    r.skeleton = salient_points(skel, turn_angle_deg);
    r.wavelet = wavelet_features(shape);
    r.geometric = geometric_features(shape, smoothed_contour);
    return r;
}

} // namespace tsr
