#include "tsr/synthetic.hpp"

#include "tsr/errors.hpp"
#include "tsr/shapeio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace tsr::synth {

namespace {

constexpr double pi = std::numbers::pi;

double seg_param(double px, double py, double ax, double ay, double bx, double by) {
    const double vx = bx - ax, vy = by - ay;
    const double len2 = vx * vx + vy * vy;
    if (len2 <= 0) return 0.0;
    return std::clamp(((px - ax) * vx + (py - ay) * vy) / len2, 0.0, 1.0);
}

double seg_dist(double px, double py, double ax, double ay, double bx, double by, double t) {
    const double cx = ax + t * (bx - ax), cy = ay + t * (by - ay);
    return std::hypot(px - cx, py - cy);
}

} // namespace

bool Primitive::inside(double x, double y) const {
    switch (kind) {
    case Disk:
        return std::hypot(x - ax, y - ay) <= r0;
    case Capsule: {
        const double t = seg_param(x, y, ax, ay, bx, by);
        return seg_dist(x, y, ax, ay, bx, by, t) <= r0;
    }
    case TaperedCapsule: {
        const double t = seg_param(x, y, ax, ay, bx, by);
        return seg_dist(x, y, ax, ay, bx, by, t) <= r0 + t * (r1 - r0);
    }
    case Ellipse: {
        const double c = std::cos(angle), s = std::sin(angle);
        const double dx = x - ax, dy = y - ay;
        const double u = c * dx + s * dy, v = -s * dx + c * dy;
        return (u * u) / (r0 * r0) + (v * v) / (r1 * r1) <= 1.0;
    }
    case Polygon: {
        bool in = false;
        const std::size_t m = poly.size() / 2;
        for (std::size_t i = 0, j = m - 1; i < m; j = i++) {
            const double xi = poly[2 * i], yi = poly[2 * i + 1];
            const double xj = poly[2 * j], yj = poly[2 * j + 1];
            if ((yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi) in = !in;
        }
        return in;
    }
    case Blob: {
        const double rho = std::hypot(x - ax, y - ay);
        const double th = std::atan2(y - ay, x - ax);
        double r = r0;
        for (std::size_t i = 0; i < amp.size(); ++i)
            r += r0 * amp[i] * std::cos(double(i + 2) * th + (i < phase.size() ? phase[i] : 0.0));
        return rho <= r;
    }
    }
    return false;
}

bool Figure::inside(double x, double y) const {
    bool in = false;
    for (const Primitive& p : add)
        if (p.inside(x, y)) {
            in = true;
            break;
        }
    if (!in) return false;
    for (const Primitive& p : sub)
        if (p.inside(x, y)) return false;
    return true;
}

namespace {

void translate(Primitive& p, double dx, double dy) {
    p.ax += dx;
    p.ay += dy;
    p.bx += dx;
    p.by += dy;
    for (std::size_t i = 0; i + 1 < p.poly.size(); i += 2) {
        p.poly[i] += dx;
        p.poly[i + 1] += dy;
    }
}

} // namespace

void Figure::center() {
    double minx = 1e18, maxx = -1e18, miny = 1e18, maxy = -1e18;
    for (double y = -160; y <= 160; y += 1.0)
        for (double x = -160; x <= 160; x += 1.0)
            if (inside(x, y)) {
                minx = std::min(minx, x);
                maxx = std::max(maxx, x);
                miny = std::min(miny, y);
                maxy = std::max(maxy, y);
            }
    if (minx > maxx) return;
    const double cx = (minx + maxx) / 2, cy = (miny + maxy) / 2;
    for (Primitive& p : add) translate(p, -cx, -cy);
    for (Primitive& p : sub) translate(p, -cx, -cy);
}

namespace {

Primitive disk(double x, double y, double r) {
    Primitive p;
    p.kind = Primitive::Disk;
    p.ax = x;
    p.ay = y;
    p.r0 = r;
    return p;
}

Primitive capsule(double ax, double ay, double bx, double by, double r) {
    Primitive p;
    p.kind = Primitive::Capsule;
    p.ax = ax;
    p.ay = ay;
    p.bx = bx;
    p.by = by;
    p.r0 = r;
    return p;
}

Primitive tapered(double ax, double ay, double bx, double by, double r0, double r1) {
    Primitive p;
    p.kind = Primitive::TaperedCapsule;
    p.ax = ax;
    p.ay = ay;
    p.bx = bx;
    p.by = by;
    p.r0 = r0;
    p.r1 = r1;
    return p;
}

Primitive ellipse(double x, double y, double a, double b, double angle) {
    Primitive p;
    p.kind = Primitive::Ellipse;
    p.ax = x;
    p.ay = y;
    p.r0 = a;
    p.r1 = b;
    p.angle = angle;
    return p;
}

Primitive polygon(std::vector<double> pts) {
    Primitive p;
    p.kind = Primitive::Polygon;
    p.poly = std::move(pts);
    return p;
}

// thick stroke along a parametric curve
void stroke(Figure& f, const std::vector<std::pair<double, double>>& pts, double r) {
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        f.add.push_back(capsule(pts[i].first, pts[i].second, pts[i + 1].first, pts[i + 1].second, r));
}

// j: jitter scale in [0,1]; d: per-family deterministic jitter draws
struct Jitter {
    Rng* rng = nullptr;
    double take(double lo, double hi) { return rng ? rng->uniform(lo, hi) : (lo + hi) / 2; }
};

Figure build_family(const std::string& family, Rng* rng) {
    Jitter j{rng};
    Figure f;

    if (family == "blob") {
        Primitive p;
        p.kind = Primitive::Blob;
        p.r0 = j.take(88, 98);
        p.amp = {j.take(0.07, 0.10), j.take(0.04, 0.06)};
        // Near-fixed relative phase: the bump layout is what makes two blobs
        // the same shape, pose comes from placement. Free phases here would
        // spread the class over many descriptor clusters.
        p.phase = {j.take(0.0, 0.5), j.take(0.0, 0.5)};
        f.add.push_back(p);
    } else if (family == "pear") {
        const double top = j.take(38, 41), bottom = j.take(60, 64);
        f.add.push_back(tapered(0, -40, 0, 30, top, bottom));
    } else if (family == "bar") {
        // tapered club: exactly one mirror axis. Jitter kept tight so the
        // class stays compact in descriptor space.
        const double thick = j.take(25, 27), thin = j.take(13, 14);
        const double len = j.take(85, 90);
        f.add.push_back(tapered(-len, 0, len, 0, thick, thin));
    } else if (family == "snake" || family == "hook" || family == "worm" || family == "eel") {
        // One wavy-tube body shared by four families that only their barbs
        // and wave phase tell apart. The snake population is bimodal in
        // phase: a main mode and a smaller far-phase mode distant enough in
        // descriptor space to sit behind the barbed families for main-mode
        // queries. Hook (one barb) and eel (three barbs) ride the main
        // phase band with widely jittered barb sizes so their distances to
        // main-mode snakes straddle the far mode; worm doubles the wave
        // frequency and keeps clear of all of it. A free-phase third
        // harmonic wobbles every tube so the phase bands stay mixed in
        // global-feature space and only the barb counts separate cleanly.
        const double freq = family == "worm" ? 4.0 : 2.0;
        const double ampl = family == "worm" ? j.take(27, 30) : j.take(46, 50);
        double lo = 0.00, hi = 0.12;
        if (family == "snake" && j.take(0.0, 1.0) >= 0.55) {
            lo = 0.26;
            hi = 0.32;
        } else if (family == "snake") {
            hi = 0.10;
        }
        const double phase = j.take(lo, hi) * pi;
        const double wob = j.take(0.0, 2.0) * pi;
        // The worm's doubled frequency is distinctive enough on its own and
        // the wobble would just destabilize its skeleton.
        const double h = family == "worm" ? 0.0 : 0.18;
        const double r = j.take(14, 17);
        auto wave = [&](double t) {
            return -ampl * (std::sin(freq * pi * t + phase) + h * std::sin(3 * freq * pi * t + wob));
        };
        // d(wave)/dt, for barb tangents
        auto slope = [&](double t) {
            return -ampl * freq * pi *
                   (std::cos(freq * pi * t + phase) + 3 * h * std::cos(3 * freq * pi * t + wob));
        };
        std::vector<std::pair<double, double>> pts;
        for (int i = 0; i <= 24; ++i) {
            const double t = double(i) / 24;
            pts.emplace_back(-85 + 170 * t, wave(t));
        }
        stroke(f, pts, r);
        // The base sits a little way in from the end: right at the end the
        // junction lands next to the cap and pruning removes the wrong
        // branch. The barb leaves at ~120 degrees from the local tangent.
        auto barb = [&](double t0, double blen, double rot) {
            const double bx = -85 + 170 * t0, by = wave(t0);
            const double tx = 170, ty = slope(t0);
            const double tn = std::hypot(tx, ty);
            const double c = std::cos(rot), s = std::sin(rot);
            const double dx = (tx * c - ty * s) / tn, dy = (tx * s + ty * c) / tn;
            f.add.push_back(capsule(bx, by, bx + blen * dx, by + blen * dy, 4.5));
        };
        // Each barb drawn with named locals: j.take calls inside one
        // argument list would have unspecified evaluation order, and the
        // jitter stream has to be stable. Barb length rides on the tube
        // radius because what matters for the skeleton (the branch must
        // outlive pruning) and the descriptor is how far the barb sticks
        // out of the tube, not its absolute size. Near-perpendicular exit
        // keeps the barb clear of the body for any wobble draw; the signs
        // alternate with the local limb direction so every barb leaves on
        // the free side.
        auto jbarb = [&](double t_lo, double t_hi, double sign) {
            const double t0 = j.take(t_lo, t_hi);
            const double blen = r + j.take(18, 32);
            const double rot = sign * j.take(95, 115) * pi / 180;
            barb(t0, blen, rot);
        };
        if (family == "hook" || family == "eel") jbarb(0.10, 0.13, -1);
        // The worm's limbs sit too close together for a sideways barb (it
        // would bridge the gap and the bridged hole fills solid), so its
        // barbs ride the first crest and last trough pointing outward.
        if (family == "worm") jbarb(0.115, 0.135, -1);
        // The wave tangent has equal slopes at t and 1-t, so the mirrored
        // rotation lands the tail barb point-symmetric to the head one.
        if (family == "eel") jbarb(0.87, 0.90, +1);
        if (family == "worm") jbarb(0.865, 0.885, +1);
        if (family == "eel") jbarb(0.46, 0.50, -1);
    } else if (family == "star") {
        const double outer = j.take(94, 102), inner = outer * j.take(0.42, 0.48);
        std::vector<double> pts;
        for (int k = 0; k < 10; ++k) {
            const double a = -pi / 2 + k * pi / 5;
            const double r = (k % 2 == 0) ? outer : inner;
            pts.push_back(r * std::cos(a));
            pts.push_back(r * std::sin(a));
        }
        f.add.push_back(polygon(std::move(pts)));
    } else if (family == "gear") {
        const double base = j.take(74, 80), tooth = j.take(12, 16);
        const int teeth = 8;
        std::vector<double> pts;
        for (int k = 0; k < teeth; ++k) {
            const double a0 = 2 * pi * k / teeth;
            const double quarter = 2 * pi / (4 * teeth);
            const double hi = base + tooth, lo = base;
            const double angs[4] = {a0, a0 + quarter, a0 + 2 * quarter, a0 + 3 * quarter};
            const double rads[4] = {hi, hi, lo, lo};
            for (int i = 0; i < 4; ++i) {
                pts.push_back(rads[i] * std::cos(angs[i]));
                pts.push_back(rads[i] * std::sin(angs[i]));
            }
        }
        f.add.push_back(polygon(std::move(pts)));
        f.add.push_back(disk(0, 0, base));
    } else if (family == "cross") {
        const double r = j.take(19, 23);
        const double harm = j.take(88, 96), varm = j.take(76, 84);
        f.add.push_back(capsule(-harm, 0, harm, 0, r));
        f.add.push_back(capsule(0, -varm, 0, varm, r));
    } else if (family == "tee") {
        const double r = j.take(17, 21);
        const double bar = j.take(70, 80), stem = j.take(118, 130);
        f.add.push_back(capsule(-bar, -52, bar, -52, r));
        f.add.push_back(capsule(0, -52, 0, -52 + stem, r));
    } else if (family == "horseshoe") {
        const double outer = j.take(82, 90);
        const double inner = outer - j.take(34, 40);
        const double cut = j.take(22, 30);
        f.add.push_back(disk(0, 0, outer));
        f.sub.push_back(disk(0, 0, inner));
        f.sub.push_back(polygon({-200, cut, 200, cut, 200, 300, -200, 300}));
    } else if (family == "bone") {
        // Thin arch with the shoulders wider than the feet, giving two
        // ~105 degree bends. The tube must be thin and the bends well over
        // the 45 degree threshold: corner rounding in the skeleton scales
        // with tube radius and eats into the measured angle. Signature
        // (turning 2, ends 2, T 0, cross 0).
        const double r = j.take(6, 7.5);
        const double drop = j.take(120, 132);
        const double armx = j.take(46, 52), bendx = j.take(80, 88);
        stroke(f, {{-armx, drop - 60}, {-bendx, -60}, {bendx, -60}, {armx, drop - 60}}, r);
    } else if (family == "fish") {
        // Ellipse body with one pointed tail on the major axis. The tail base
        // is narrower than the body there, so the outline stays convex at the
        // joint and the skeleton runs tip-to-head without forking: (0,2,0,0).
        const double a = j.take(64, 72), b = j.take(34, 40);
        const double tail = j.take(40, 50);
        f.add.push_back(ellipse(0, 0, a, b, 0));
        const double neck = a * 0.75, half = b * 0.35;
        f.add.push_back(polygon({neck, -half, a + tail, 0, neck, half}));
    } else {
        throw UsageError("unknown synthetic family '" + family + "'");
    }

    f.center();
    return f;
}

} // namespace

Figure prototype(const std::string& family) { return build_family(family, nullptr); }

Figure make_family(const std::string& family, Rng& rng) { return build_family(family, &rng); }

std::vector<std::string> families() {
    return {"blob", "pear",  "bar",   "snake",     "hook", "worm", "eel", "star",
            "gear", "cross", "tee", "horseshoe", "bone", "fish"};
}

BinaryShape rasterize(const Figure& figure, const Placement& placement, int canvas,
                      const std::string& id) {
    BinaryShape s;
    s.id = id;
    s.width = canvas;
    s.height = canvas;
    s.grid.assign(std::size_t(canvas) * canvas, 0);

    const double c = (canvas - 1) / 2.0;
    const double a = placement.angle_deg * pi / 180.0;
    const double cosr = std::cos(a), sinr = std::sin(a);
    for (int y = 0; y < canvas; ++y)
        for (int x = 0; x < canvas; ++x) {
            // canvas -> figure frame: untranslate, unrotate, unscale
            const double px = (x - c - placement.dx) / placement.scale;
            const double py = (y - c - placement.dy) / placement.scale;
            const double fx = cosr * px + sinr * py;
            const double fy = -sinr * px + cosr * py;
            if (figure.inside(fx, fy)) s.grid[std::size_t(y) * canvas + x] = 1;
        }
    return s;
}

BinaryShape make_instance(const std::string& family, std::uint64_t seed, int canvas) {
    std::uint64_t h = 1469598103934665603ull;
    for (char ch : family) h = (h ^ std::uint8_t(ch)) * 1099511628211ull;
    Rng rng = Rng::substream(seed, h);

    Figure fig = make_family(family, rng);
    Placement place;
    place.angle_deg = rng.uniform(0.0, 360.0);
    place.scale = rng.uniform(0.85, 1.05);
    place.dx = rng.uniform(-8.0, 8.0);
    place.dy = rng.uniform(-8.0, 8.0);
    return rasterize(fig, place, canvas, family + "-" + std::to_string(seed));
}

DatasetSpec kimia_like() {
    DatasetSpec s;
    s.classes = {"blob", "bar", "pear", "star", "cross", "tee", "horseshoe", "bone", "fish"};
    s.per_class = 11;
    return s;
}

DatasetSpec mpeg7_like() {
    DatasetSpec s;
    s.classes = {"blob", "pear", "bar", "snake", "hook", "worm", "eel", "star", "tee",
                 "horseshoe"};
    s.per_class = 20;
    return s;
}

void write_dataset(const std::filesystem::path& dir, const DatasetSpec& spec, std::uint64_t seed) {
    std::filesystem::create_directories(dir);
    for (std::size_t c = 0; c < spec.classes.size(); ++c) {
        for (int i = 0; i < spec.per_class; ++i) {
            const std::uint64_t inst = (seed << 20) ^ (std::uint64_t(c) << 10) ^ std::uint64_t(i);
            BinaryShape shape = make_instance(spec.classes[c], inst, spec.canvas);
            char num[16];
            std::snprintf(num, sizeof num, "%02d", i);
            shape.id = spec.classes[c] + "-" + num;
            save_pgm(shape, dir / (shape.id + ".pgm"));
        }
    }
}

} // namespace tsr::synth
