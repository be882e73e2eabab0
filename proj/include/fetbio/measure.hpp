#pragma once

#include <span>
#include <vector>

#include "fetbio/core.hpp"
#include "fetbio/imageops.hpp"
#include "fetbio/msl.hpp"

// Stage 5: CBD via the width profile and Sylvian fissure, BBD via
// intensity-derivative skull detection along the extended CBD line, TCD via
// the cerebellum convex-hull diameter, plus the oriented-box long axis used
// by the reliability check.

namespace fetbio {

/// Cerebrum width profile perpendicular to the MSL: per-bin perpendicular
/// extent along the line direction t. Extents include the pixel footprint
/// (projection of one pixel onto the line normal), so endpoints sit on the
/// outer pixel edges rather than pixel centers.
struct WidthProfile {
    double bin_mm = 1.0;
    double t0 = 0.0;  // center of the first bin
    std::vector<double> raw_extent;
    std::vector<double> smooth_extent;  // 3-bin centered moving average
    std::vector<double> d_min, d_max;   // signed offsets of extreme pixels
    std::vector<int> count;
    double t_center = 0.0;        // projection of the mask centroid
    bool superior_positive = true;  // is +t the superior direction
    double footprint = 0.0;

    double t_at(size_t i) const { return t0 + static_cast<double>(i) * bin_mm; }
    size_t size() const { return raw_extent.size(); }
};

struct OrientedRect {
    Vec2 center;
    double half_long = 0.0;
    double half_short = 0.0;
    double long_axis_deg = 0.0;  // in [0, 180)
};

/// Builds the width profile of `points` (mask pixel centers in mm) against
/// the MSL. `footprint_mm` is added to every non-empty bin's extent.
WidthProfile width_profile(std::span<const Vec2> points, const Line2D& line,
                           double bin_mm, double footprint_mm,
                           bool superior_positive);

/// Width profile of the left+right hemisphere classes of a label slice.
WidthProfile width_profile(const Mask2D& labels, double sx, double sy,
                           const Line2D& line, double bin_mm,
                           bool superior_positive);

/// Index of the strict local minimum of the smoothed profile that lies
/// superior to the mass center and closest to it; plateau minima report
/// their first bin. Throws "fissure not found" when no such minimum exists.
size_t locate_sylvian_fissure(const WidthProfile& profile);

/// CBD: maximal width of the cerebral hemispheres superior to the Sylvian
/// fissure and perpendicular to the MSL. Falls back to the global maximum
/// bin (with a note) when the fissure is not found.
Measurement compute_cbd(const Mask2D& labels, double sx, double sy,
                        const Line2D& line, const Vec2& superior_direction,
                        int slice_index, double bin_mm = 0.0);

/// BBD: each CBD endpoint is extended outward along the CBD direction; the
/// intensity derivative is sampled at half-pixel steps, local |derivative|
/// peaks at least tau_rel of the ray maximum qualify, and of the two
/// qualifying peaks closest to the endpoint the one with the larger
/// |derivative| is the inner skull point. Throws "skull not found" when a
/// side has no qualifying peak.
Measurement compute_bbd(const Image2D& img, double sx, double sy,
                        const Measurement& cbd, double tau_rel = 0.2);

/// Farthest pair of points: monotone-chain hull + rotating-calipers scan.
struct HullDiameter {
    Vec2 p, q;
    double length = 0.0;
};
HullDiameter convex_hull_diameter(std::span<const Vec2> points);

/// Minimum-area enclosing rectangle (rotating calipers over hull edges).
/// Collinear input degenerates to a zero-short-extent rectangle along the
/// points.
OrientedRect min_area_rect(std::span<const Vec2> points);

/// TCD: convex-hull diameter of the cerebellum boundary pixel centers, with
/// the hull-diameter angle and the min-area-rect long-axis angle attached
/// for the reliability check.
Measurement compute_tcd(const Mask2D& labels, double sx, double sy,
                        int slice_index);

/// Cerebellum boundary pixel centers in mm (pixels with at least one
/// non-cerebellum 4-neighbor; image border counts as background).
std::vector<Vec2> cerebellum_boundary_mm(const Mask2D& labels, double sx, double sy);

}  // namespace fetbio
