#include "fetbio/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fetbio {

WidthProfile width_profile(std::span<const Vec2> points, const Line2D& line,
                           double bin_mm, double footprint_mm,
                           bool superior_positive) {
    if (points.empty()) throw Error("width_profile: empty mask");
    if (bin_mm <= 0.0) throw Error("width_profile: bin width must be > 0");

    const Vec2 u = line.direction();
    double tmin = std::numeric_limits<double>::infinity();
    double tmax = -tmin;
    Vec2 centroid{0, 0};
    for (const Vec2& p : points) {
        const double t = p.dot(u);
        tmin = std::min(tmin, t);
        tmax = std::max(tmax, t);
        centroid = centroid + p;
    }
    centroid = centroid * (1.0 / points.size());

    const size_t nbins = static_cast<size_t>((tmax - tmin) / bin_mm) + 1;
    WidthProfile prof;
    prof.bin_mm = bin_mm;
    prof.t0 = tmin + 0.5 * bin_mm;
    prof.footprint = footprint_mm;
    prof.superior_positive = superior_positive;
    prof.t_center = centroid.dot(u);
    prof.raw_extent.assign(nbins, 0.0);
    prof.d_min.assign(nbins, std::numeric_limits<double>::infinity());
    prof.d_max.assign(nbins, -std::numeric_limits<double>::infinity());
    prof.count.assign(nbins, 0);

    for (const Vec2& p : points) {
        const double t = p.dot(u);
        size_t b = static_cast<size_t>((t - tmin) / bin_mm);
        if (b >= nbins) b = nbins - 1;
        const double d = line.signed_distance(p);
        prof.d_min[b] = std::min(prof.d_min[b], d);
        prof.d_max[b] = std::max(prof.d_max[b], d);
        ++prof.count[b];
    }
    for (size_t b = 0; b < nbins; ++b)
        if (prof.count[b] > 0)
            prof.raw_extent[b] = prof.d_max[b] - prof.d_min[b] + footprint_mm;

    prof.smooth_extent.resize(nbins);
    for (size_t b = 0; b < nbins; ++b) {
        double sum = prof.raw_extent[b];
        int cnt = 1;
        if (b > 0) { sum += prof.raw_extent[b - 1]; ++cnt; }
        if (b + 1 < nbins) { sum += prof.raw_extent[b + 1]; ++cnt; }
        prof.smooth_extent[b] = sum / cnt;
    }
    return prof;
}

namespace {

std::vector<Vec2> class_points_mm(const Mask2D& labels, double sx, double sy,
                                  std::initializer_list<uint8_t> classes) {
    std::vector<Vec2> pts;
    for (int y = 0; y < labels.h; ++y)
        for (int x = 0; x < labels.w; ++x)
            for (uint8_t c : classes)
                if (labels.at(x, y) == c) {
                    pts.push_back({x * sx, y * sy});
                    break;
                }
    return pts;
}

double pixel_footprint(const Line2D& line, double sx, double sy) {
    // support of one pixel in the line-normal direction
    return std::abs(line.a) * sx + std::abs(line.b) * sy;
}

}  // namespace

WidthProfile width_profile(const Mask2D& labels, double sx, double sy,
                           const Line2D& line, double bin_mm,
                           bool superior_positive) {
    const auto pts = class_points_mm(labels, sx, sy,
                                     {LabelMap::kLeft, LabelMap::kRight});
    return width_profile(pts, line, bin_mm, pixel_footprint(line, sx, sy),
                         superior_positive);
}

size_t locate_sylvian_fissure(const WidthProfile& profile) {
    const auto& v = profile.smooth_extent;
    const size_t n = v.size();
    if (n < 3) throw Error("fissure not found");

    // strict local minima with plateaus reported at their first bin
    std::vector<size_t> minima;
    for (size_t i = 1; i + 1 < n;) {
        size_t j = i;  // plateau [i, j] of equal values
        while (j + 1 < n && v[j + 1] == v[i]) ++j;
        if (j + 1 < n && v[i - 1] > v[i] && v[j + 1] > v[i]) minima.push_back(i);
        i = j + 1;
    }

    const double tc = profile.t_center;
    const double sgn = profile.superior_positive ? 1.0 : -1.0;
    size_t best = n;
    double best_dist = std::numeric_limits<double>::infinity();
    for (size_t m : minima) {
        const double t = profile.t_at(m);
        if (sgn * (t - tc) <= 0.0) continue;  // must be superior to the center
        const double dist = std::abs(t - tc);
        if (dist < best_dist) {
            best_dist = dist;
            best = m;
        }
    }
    if (best == n) throw Error("fissure not found");
    return best;
}

Measurement compute_cbd(const Mask2D& labels, double sx, double sy,
                        const Line2D& line, const Vec2& superior_direction,
                        int slice_index, double bin_mm) {
    if (bin_mm <= 0.0) bin_mm = std::min(sx, sy);
    const Vec2 u = line.direction();
    const bool superior_positive = u.dot(superior_direction) >= 0.0;

    const auto left = class_points_mm(labels, sx, sy, {LabelMap::kLeft});
    const auto right = class_points_mm(labels, sx, sy, {LabelMap::kRight});
    if (left.empty() || right.empty())
        throw Error("compute_cbd: missing hemisphere class");

    std::vector<Vec2> pts = left;
    pts.insert(pts.end(), right.begin(), right.end());
    const double footprint = pixel_footprint(line, sx, sy);
    const WidthProfile prof = width_profile(pts, line, bin_mm, footprint,
                                            superior_positive);

    Measurement m;
    m.kind = MeasureKind::CBD;
    m.slice_index = slice_index;

    size_t search_begin = 0;
    size_t search_end = prof.size();  // half-open over bin indices
    bool have_fissure = true;
    size_t fissure = 0;
    try {
        fissure = locate_sylvian_fissure(prof);
        m.fissure_t_mm = prof.t_at(fissure);
        if (prof.superior_positive)
            search_begin = fissure + 1;
        else
            search_end = fissure;
    } catch (const Error&) {
        have_fissure = false;
        m.notes.push_back("fissure not found; global maximum width used");
    }
    if (search_begin >= search_end) {
        have_fissure = false;
        search_begin = 0;
        search_end = prof.size();
        m.notes.push_back("no bins superior to fissure; global maximum width used");
    }
    (void)have_fissure;

    size_t best = search_begin;
    for (size_t b = search_begin; b < search_end; ++b)
        if (prof.smooth_extent[b] > prof.smooth_extent[best]) best = b;
    if (prof.count[best] == 0)
        throw Error("compute_cbd: empty maximal bin");

    // endpoints on the common perpendicular at the bin center, pushed to the
    // outer pixel edges, so the segment is exactly perpendicular to the MSL
    const Vec2 base = line.point_at(prof.t_at(best));
    const Vec2 n = line.normal();
    m.endpoint_a = base + n * (prof.d_max[best] + 0.5 * footprint);
    m.endpoint_b = base + n * (prof.d_min[best] - 0.5 * footprint);
    m.value_mm = length_mm(m.endpoint_a, m.endpoint_b);
    return m;
}

namespace {

struct RayPeak {
    double position_mm = 0.0;
    double magnitude = 0.0;
};

// local maxima of |derivative| (plateaus at their first sample), interior only
std::vector<RayPeak> derivative_peaks(const Profile& deriv) {
    std::vector<RayPeak> peaks;
    const auto& v = deriv.value;
    const size_t n = v.size();
    size_t i = 1;
    while (i + 1 < n) {
        size_t j = i;
        const double mag = std::abs(v[i]);
        while (j + 1 < n && std::abs(v[j + 1]) == mag) ++j;
        if (j + 1 < n && std::abs(v[i - 1]) < mag && std::abs(v[j + 1]) < mag)
            peaks.push_back({deriv.position_mm[i], mag});
        i = j + 1;
    }
    return peaks;
}

Vec2 ray_border_exit(const Vec2& origin, const Vec2& dir, double w_mm, double h_mm) {
    double tmax = std::numeric_limits<double>::infinity();
    if (dir.x > 1e-15) tmax = std::min(tmax, (w_mm - origin.x) / dir.x);
    if (dir.x < -1e-15) tmax = std::min(tmax, -origin.x / dir.x);
    if (dir.y > 1e-15) tmax = std::min(tmax, (h_mm - origin.y) / dir.y);
    if (dir.y < -1e-15) tmax = std::min(tmax, -origin.y / dir.y);
    if (!std::isfinite(tmax) || tmax <= 0.0)
        throw Error("skull not found");
    return origin + dir * (tmax * (1.0 - 1e-9));
}

}  // namespace

Measurement compute_bbd(const Image2D& img, double sx, double sy,
                        const Measurement& cbd, double tau_rel) {
    const double w_mm = (img.w - 1) * sx;
    const double h_mm = (img.h - 1) * sy;
    const double step = 0.5 * std::min(sx, sy);

    const Vec2 dir_ab = cbd.endpoint_a - cbd.endpoint_b;
    const double len = dir_ab.norm();
    if (len <= 0.0) throw Error("compute_bbd: degenerate CBD");
    const Vec2 u = dir_ab * (1.0 / len);

    auto skull_point = [&](const Vec2& endpoint, const Vec2& outward) {
        if (endpoint.x < 0 || endpoint.y < 0 || endpoint.x > w_mm || endpoint.y > h_mm)
            throw Error("skull not found");
        const Vec2 exit = ray_border_exit(endpoint, outward, w_mm, h_mm);
        auto [prof, deriv] = line_intensity_derivative(img, sx, sy, endpoint, exit, step);
        double max_mag = 0.0;
        for (double d : deriv.value) max_mag = std::max(max_mag, std::abs(d));
        if (max_mag <= 0.0) throw Error("skull not found");

        std::vector<RayPeak> qualified;
        for (const RayPeak& pk : derivative_peaks(deriv))
            if (pk.magnitude >= tau_rel * max_mag) qualified.push_back(pk);
        if (qualified.empty()) throw Error("skull not found");

        // two qualifying peaks closest to the endpoint; keep the stronger one
        RayPeak chosen = qualified[0];
        if (qualified.size() > 1 && qualified[1].magnitude > chosen.magnitude)
            chosen = qualified[1];
        return endpoint + outward * chosen.position_mm;
    };

    Measurement m;
    m.kind = MeasureKind::BBD;
    m.slice_index = cbd.slice_index;
    m.endpoint_a = skull_point(cbd.endpoint_a, u);
    m.endpoint_b = skull_point(cbd.endpoint_b, u * -1.0);
    m.value_mm = length_mm(m.endpoint_a, m.endpoint_b);
    return m;
}

namespace {

double cross3(const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a - o).cross(b - o);
}

// monotone chain, strictly convex (collinear points dropped)
std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
    std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const Vec2& a, const Vec2& b) {
                              return a.x == b.x && a.y == b.y;
                          }),
              pts.end());
    const size_t n = pts.size();
    if (n <= 2) return pts;
    std::vector<Vec2> hull(2 * n);
    size_t k = 0;
    for (size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross3(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    const size_t lower = k + 1;
    for (size_t i = n - 1; i-- > 0;) {
        while (k >= lower && cross3(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

}  // namespace

HullDiameter convex_hull_diameter(std::span<const Vec2> points) {
    if (points.size() < 2) throw Error("convex_hull_diameter: need >= 2 points");
    std::vector<Vec2> hull = convex_hull({points.begin(), points.end()});
    if (hull.size() < 2) throw Error("convex_hull_diameter: all points identical");

    HullDiameter best;
    auto consider = [&](const Vec2& p, const Vec2& q) {
        const double d = length_mm(p, q);
        if (d > best.length) best = {p, q, d};
    };
    const size_t h = hull.size();
    if (h == 2) {
        consider(hull[0], hull[1]);
        return best;
    }
    // rotating calipers antipodal scan
    size_t k = 1;
    auto area2 = [&](size_t a, size_t b, size_t c) {
        return std::abs(cross3(hull[a], hull[b], hull[c]));
    };
    while (k + 1 < h && area2(h - 1, 0, k + 1) > area2(h - 1, 0, k)) ++k;
    for (size_t i = 0, j = k; i <= k && j < h; ++i) {
        consider(hull[i], hull[j]);
        while (j + 1 < h &&
               area2(i, (i + 1) % h, j + 1) > area2(i, (i + 1) % h, j)) {
            ++j;
            consider(hull[i], hull[j]);
        }
    }
    return best;
}

OrientedRect min_area_rect(std::span<const Vec2> points) {
    if (points.size() < 2) throw Error("min_area_rect: need >= 2 points");
    std::vector<Vec2> hull = convex_hull({points.begin(), points.end()});
    if (hull.size() < 2) throw Error("min_area_rect: all points identical");

    OrientedRect rect;
    if (hull.size() == 2) {
        // collinear: zero short extent along the points
        const Vec2 d = hull[1] - hull[0];
        rect.center = (hull[0] + hull[1]) * 0.5;
        rect.half_long = 0.5 * d.norm();
        rect.half_short = 0.0;
        rect.long_axis_deg = fold_angle_180(std::atan2(d.y, d.x) * 180.0 / M_PI);
        return rect;
    }

    double best_area = std::numeric_limits<double>::infinity();
    const size_t h = hull.size();
    for (size_t i = 0; i < h; ++i) {
        const Vec2 e = hull[(i + 1) % h] - hull[i];
        const double elen = e.norm();
        if (elen <= 0) continue;
        const Vec2 u{e.x / elen, e.y / elen};
        const Vec2 v{-u.y, u.x};
        double umin = std::numeric_limits<double>::infinity(), umax = -umin;
        double vmin = umin, vmax = -umin;
        for (const Vec2& p : hull) {
            const double pu = p.dot(u), pv = p.dot(v);
            umin = std::min(umin, pu);
            umax = std::max(umax, pu);
            vmin = std::min(vmin, pv);
            vmax = std::max(vmax, pv);
        }
        const double area = (umax - umin) * (vmax - vmin);
        if (area < best_area) {
            best_area = area;
            const double cu = 0.5 * (umin + umax), cv = 0.5 * (vmin + vmax);
            rect.center = u * cu + v * cv;
            const double du = 0.5 * (umax - umin), dv = 0.5 * (vmax - vmin);
            if (du >= dv) {
                rect.half_long = du;
                rect.half_short = dv;
                rect.long_axis_deg = fold_angle_180(std::atan2(u.y, u.x) * 180.0 / M_PI);
            } else {
                rect.half_long = dv;
                rect.half_short = du;
                rect.long_axis_deg = fold_angle_180(std::atan2(v.y, v.x) * 180.0 / M_PI);
            }
        }
    }
    return rect;
}

std::vector<Vec2> cerebellum_boundary_mm(const Mask2D& labels, double sx, double sy) {
    std::vector<Vec2> pts;
    for (int y = 0; y < labels.h; ++y) {
        for (int x = 0; x < labels.w; ++x) {
            if (labels.at(x, y) != LabelMap::kCerebellum) continue;
            bool boundary = false;
            const int nb[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
            for (auto& d : nb) {
                const int nx = x + d[0], ny = y + d[1];
                if (nx < 0 || ny < 0 || nx >= labels.w || ny >= labels.h ||
                    labels.at(nx, ny) != LabelMap::kCerebellum) {
                    boundary = true;
                    break;
                }
            }
            if (boundary) pts.push_back({x * sx, y * sy});
        }
    }
    return pts;
}

Measurement compute_tcd(const Mask2D& labels, double sx, double sy,
                        int slice_index) {
    const auto boundary = cerebellum_boundary_mm(labels, sx, sy);
    if (boundary.empty()) throw Error("compute_tcd: empty cerebellum");

    const HullDiameter diam = convex_hull_diameter(boundary);  // throws if degenerate
    const OrientedRect rect = min_area_rect(boundary);

    Measurement m;
    m.kind = MeasureKind::TCD;
    m.slice_index = slice_index;
    m.endpoint_a = diam.p;
    m.endpoint_b = diam.q;
    m.value_mm = diam.length;
    const Vec2 d = diam.q - diam.p;
    m.hull_angle_deg = fold_angle_180(std::atan2(d.y, d.x) * 180.0 / M_PI);
    m.rect_angle_deg = rect.long_axis_deg;
    return m;
}

}  // namespace fetbio
