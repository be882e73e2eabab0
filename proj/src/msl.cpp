#include "fetbio/msl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fetbio/rng.hpp"

namespace fetbio {

double svm_objective(std::span<const Vec2> points, std::span<const int> labels,
                     double w0, double w1, double bias, double lambda) {
    double hinge = 0.0;
    for (size_t i = 0; i < points.size(); ++i) {
        const double margin =
            labels[i] * (w0 * points[i].x + w1 * points[i].y - bias);
        hinge += std::max(0.0, 1.0 - margin);
    }
    return hinge / points.size() + lambda * (w0 * w0 + w1 * w1);
}

namespace {

// Exact minimizer of the average hinge in the bias for fixed weights.
// The subgradient in b is a step function with +1 jumps at
// w.x_i - 1 (positive samples) and w.x_i + 1 (negative samples), running
// from -n_neg up to +n_pos; the argmin is the interval where it crosses
// zero. Within that interval the value is constant, so we tie-break toward
// the midpoint of the gap between the two classes' projections.
double polish_bias(std::span<const Vec2> points, std::span<const int> labels,
                   double w0, double w1) {
    const size_t n = points.size();
    std::vector<double> bp;
    bp.reserve(n);
    size_t n_neg = 0;
    double max_neg_proj = -std::numeric_limits<double>::infinity();
    double min_pos_proj = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < n; ++i) {
        const double proj = w0 * points[i].x + w1 * points[i].y;
        if (labels[i] > 0) {
            bp.push_back(proj - 1.0);
            min_pos_proj = std::min(min_pos_proj, proj);
        } else {
            bp.push_back(proj + 1.0);
            ++n_neg;
            max_neg_proj = std::max(max_neg_proj, proj);
        }
    }
    std::sort(bp.begin(), bp.end());
    // slope between bp[j-1] and bp[j] is j - n_neg; zero at j == n_neg
    double lo, hi;
    if (n_neg == 0) {
        lo = hi = bp.front();
    } else if (n_neg == n) {
        lo = hi = bp.back();
    } else {
        lo = bp[n_neg - 1];
        hi = bp[n_neg];
    }
    const double midgap = 0.5 * (max_neg_proj + min_pos_proj);
    return std::clamp(midgap, lo, hi);
}

}  // namespace

SvmResult fit_linear_svm(std::span<const Vec2> points, std::span<const int> labels,
                         const SvmConfig& cfg) {
    const size_t n = points.size();
    if (n < 2 || labels.size() != n)
        throw Error("fit_linear_svm: need at least 2 labeled points");
    bool has_pos = false, has_neg = false;
    for (int y : labels) (y > 0 ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg) throw Error("not separatable task");

    // center coordinates for conditioning; the bias is shifted back at the end
    Vec2 mean{0, 0};
    for (const Vec2& p : points) mean = mean + p;
    mean = mean * (1.0 / n);
    std::vector<Vec2> pts(n);
    for (size_t i = 0; i < n; ++i) pts[i] = points[i] - mean;

    Rng rng(cfg.seed);
    const double lambda = cfg.lambda;
    double w0 = 0.0, w1 = 0.0, b = 0.0;

    double best_obj = svm_objective(pts, labels, w0, w1, b, lambda);
    double best_w0 = w0, best_w1 = w1, best_b = b;
    double window_best = best_obj;
    bool converged = false;
    uint64_t t = 0;

    while (t < cfg.max_iter) {
        ++t;
        const size_t i = rng.bounded(n);
        const double eta = 1.0 / (lambda * static_cast<double>(t));
        const double margin = labels[i] * (w0 * pts[i].x + w1 * pts[i].y - b);
        const double shrink = 1.0 - 2.0 / static_cast<double>(t);
        w0 *= shrink;
        w1 *= shrink;
        if (margin < 1.0) {
            w0 += eta * labels[i] * pts[i].x;
            w1 += eta * labels[i] * pts[i].y;
            b -= eta * labels[i];
        }
        if (t % cfg.window == 0) {
            const double obj = svm_objective(pts, labels, w0, w1, b, lambda);
            if (obj < best_obj) {
                best_obj = obj;
                best_w0 = w0;
                best_w1 = w1;
                best_b = b;
            }
            const double improvement = window_best - best_obj;
            if (improvement < cfg.tol * std::max(window_best, 1e-300)) {
                converged = true;
                break;
            }
            window_best = best_obj;
        }
    }

    SvmResult res;
    res.w0 = best_w0;
    res.w1 = best_w1;
    res.converged = converged;
    res.iterations = t;
    const double wn = std::hypot(best_w0, best_w1);
    if (wn < 1e-12) {
        // degenerate direction (e.g. coincident class clouds)
        res.converged = false;
        res.bias = best_b + best_w0 * mean.x + best_w1 * mean.y;
        res.objective = best_obj;
        return res;
    }
    const double b_centered = polish_bias(pts, labels, best_w0, best_w1);
    res.objective = svm_objective(pts, labels, best_w0, best_w1, b_centered, lambda);
    res.bias = b_centered + best_w0 * mean.x + best_w1 * mean.y;
    return res;
}

MslFit msl_for_slice(const Mask2D& labels, double sx, double sy,
                     const SvmConfig& cfg) {
    std::vector<Vec2> left, right;
    for (int y = 0; y < labels.h; ++y) {
        for (int x = 0; x < labels.w; ++x) {
            const uint8_t l = labels.at(x, y);
            if (l == LabelMap::kLeft)
                left.push_back(voxel_to_mm({static_cast<double>(x), static_cast<double>(y)}, sx, sy));
            else if (l == LabelMap::kRight)
                right.push_back(voxel_to_mm({static_cast<double>(x), static_cast<double>(y)}, sx, sy));
        }
    }
    if (left.empty() || right.empty())
        throw Error("msl_for_slice: missing hemisphere class");

    // seeded uniform subsample, at most cfg.subsample_per_class per class
    auto subsample = [&](std::vector<Vec2>& pts, uint64_t salt) {
        if (pts.size() <= cfg.subsample_per_class) return;
        Rng rng(Rng::mix(cfg.seed, salt));
        for (size_t i = 0; i < cfg.subsample_per_class; ++i) {
            const size_t j = i + rng.bounded(pts.size() - i);
            std::swap(pts[i], pts[j]);
        }
        pts.resize(cfg.subsample_per_class);
    };
    subsample(left, 0);
    subsample(right, 1);

    std::vector<Vec2> pts;
    std::vector<int> ys;
    pts.reserve(left.size() + right.size());
    for (const Vec2& p : left) { pts.push_back(p); ys.push_back(-1); }
    for (const Vec2& p : right) { pts.push_back(p); ys.push_back(+1); }

    MslFit fit;
    fit.svm = fit_linear_svm(pts, ys, cfg);
    if (std::hypot(fit.svm.w0, fit.svm.w1) < 1e-12)
        throw Error("msl_for_slice: degenerate separator");
    fit.line = fit.svm.line();
    return fit;
}

Vec2 Orientation::inferior_endpoint() const {
    const Vec2 u = c - q;
    const double s0 = u.cross(b0 - c);
    return (s0 > 0 ? 1 : (s0 < 0 ? -1 : 0)) == inferior_sign ? b0 : b1;
}

Vec2 Orientation::superior_endpoint() const {
    const Vec2 inf = inferior_endpoint();
    return (inf.x == b0.x && inf.y == b0.y) ? b1 : b0;
}

Vec2 Orientation::inferior_direction() const {
    const Vec2 d = inferior_endpoint() - c;
    const double n = d.norm();
    if (n <= 0) throw Error("Orientation: degenerate anchors");
    return d * (1.0 / n);
}

std::pair<Vec2, Vec2> line_rect_intersections(const Line2D& line, const RectMM& rect) {
    std::vector<Vec2> hits;
    auto add = [&](const Vec2& p) {
        for (const Vec2& q : hits)
            if (length_mm(p, q) < 1e-9) return;
        hits.push_back(p);
    };
    const double a = line.a, b = line.b, c = line.c;
    // vertical edges x = rect.x0 / x1: a*x + b*y + c = 0 -> y = -(c + a x)/b
    if (std::abs(b) > 1e-15) {
        for (double x : {rect.x0, rect.x1}) {
            const double y = -(c + a * x) / b;
            if (y >= rect.y0 - 1e-9 && y <= rect.y1 + 1e-9)
                add({x, std::clamp(y, rect.y0, rect.y1)});
        }
    }
    if (std::abs(a) > 1e-15) {
        for (double y : {rect.y0, rect.y1}) {
            const double x = -(c + b * y) / a;
            if (x >= rect.x0 - 1e-9 && x <= rect.x1 + 1e-9)
                add({std::clamp(x, rect.x0, rect.x1), y});
        }
    }
    if (hits.size() < 2)
        throw Error("line_rect_intersections: line does not cross the rectangle");
    // take the farthest pair (collinear, so the extremes)
    size_t bi = 0, bj = 1;
    double best = -1.0;
    for (size_t i = 0; i < hits.size(); ++i)
        for (size_t j = i + 1; j < hits.size(); ++j) {
            const double d = length_mm(hits[i], hits[j]);
            if (d > best) { best = d; bi = i; bj = j; }
        }
    if (best < 1e-9)
        throw Error("line_rect_intersections: degenerate corner contact");
    Vec2 p = hits[bi], q = hits[bj];
    if (q.x < p.x || (q.x == p.x && q.y < p.y)) std::swap(p, q);
    return {p, q};
}

Orientation slice_orientation(const Line2D& line, const RectMM& rect,
                              std::span<const Vec2> cerebellum_points_mm,
                              int k, uint64_t seed) {
    if (cerebellum_points_mm.empty())
        throw Error("slice_orientation: empty cerebellum");
    Orientation o;
    std::tie(o.b0, o.b1) = line_rect_intersections(line, rect);
    o.c = (o.b0 + o.b1) * 0.5;

    // normal through C, intersected with the border; Q is the hit with the
    // larger x (larger y on ties)
    const Line2D normal = Line2D::normalized(-line.b, line.a,
                                             line.b * o.c.x - line.a * o.c.y);
    auto [q0, q1] = line_rect_intersections(normal, rect);
    if (q1.x > q0.x || (q1.x == q0.x && q1.y > q0.y))
        o.q = q1;
    else
        o.q = q0;

    Rng rng(seed);
    const size_t n = cerebellum_points_mm.size();
    int pos = 0, neg = 0;
    const Vec2 u = o.c - o.q;
    for (int i = 0; i < k; ++i) {
        const Vec2& p = cerebellum_points_mm[rng.bounded(n)];
        const double cr = u.cross(p - o.c);
        if (cr > 0) ++pos;
        else if (cr < 0) ++neg;
    }
    o.inferior_sign = pos >= neg ? +1 : -1;
    o.consistent = (pos == 0 || neg == 0) && (pos + neg) > 0;
    o.from_cerebellum = true;
    return o;
}

std::map<int, Orientation> propagate_orientation(
    const std::map<int, Line2D>& lines, const std::map<int, Orientation>& known,
    const RectMM& rect) {
    if (known.empty())
        throw Error("propagate_orientation: no slice has a cerebellum");

    std::map<int, Orientation> out = known;
    for (const auto& [slice, line] : lines) {
        if (out.count(slice)) continue;

        // closest cerebellum-bearing slice, lower index on ties
        int best_src = -1;
        int best_d = std::numeric_limits<int>::max();
        for (const auto& [src, orient] : known) {
            const int d = std::abs(src - slice);
            if (d < best_d) { best_d = d; best_src = src; }
        }
        const Orientation& src = known.at(best_src);

        Orientation o;
        std::tie(o.b0, o.b1) = line_rect_intersections(line, rect);
        o.c = (o.b0 + o.b1) * 0.5;
        const Line2D normal = Line2D::normalized(-line.b, line.a,
                                                 line.b * o.c.x - line.a * o.c.y);
        auto [q0, q1] = line_rect_intersections(normal, rect);
        o.q = (q1.x > q0.x || (q1.x == q0.x && q1.y > q0.y)) ? q1 : q0;

        // match endpoints to the source's inferior/superior endpoints by the
        // assignment with the smaller total in-plane distance
        const Vec2 src_inf = src.inferior_endpoint();
        const Vec2 src_sup = src.superior_endpoint();
        const double direct =
            length_mm(o.b0, src_inf) + length_mm(o.b1, src_sup);
        const double swapped =
            length_mm(o.b0, src_sup) + length_mm(o.b1, src_inf);
        const Vec2 inf_endpoint = direct <= swapped ? o.b0 : o.b1;

        const Vec2 u = o.c - o.q;
        const double cr = u.cross(inf_endpoint - o.c);
        o.inferior_sign = cr > 0 ? +1 : -1;
        o.consistent = true;
        o.from_cerebellum = false;
        out[slice] = o;
    }
    return out;
}

}  // namespace fetbio
