#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "fetbio/core.hpp"
#include "fetbio/imageops.hpp"

// Stage 4: per-slice mid-sagittal line via a hinge-loss linear SVM over
// hemisphere pixel coordinates, and brain orientation via the cerebellum
// cross-product test.

namespace fetbio {

struct SvmConfig {
    double lambda = 10.0;
    uint64_t max_iter = 100000000ULL;  // 1e8
    uint64_t seed = 0;
    // early stop: best objective improves by < tol (relative) over a window
    uint64_t window = 1000;
    double tol = 1e-8;
    size_t subsample_per_class = 2000;  // used by msl_for_slice
};

struct SvmResult {
    double w0 = 0.0, w1 = 0.0;
    double bias = 0.0;
    bool converged = false;
    uint64_t iterations = 0;
    double objective = 0.0;

    Line2D line() const { return Line2D::normalized(w0, w1, -bias); }
};

/// Average hinge loss plus lambda * ||w||^2 over the given sample.
double svm_objective(std::span<const Vec2> points, std::span<const int> labels,
                     double w0, double w1, double bias, double lambda);

/// Minimizes (1/n) sum max(0, 1 - y_i (w.x_i - b)) + lambda ||w||^2 by
/// single-sample stochastic subgradient steps of size 1/(lambda t), keeping
/// the best-objective iterate. When class counts balance, the optimum can be
/// flat in the bias over an interval; the returned bias is the exact 1-D
/// hinge minimizer for the final weights, tie-broken toward the midpoint of
/// the projection gap between the classes, which makes the result
/// deterministic and symmetric for mirror-symmetric inputs.
/// Throws "not separatable task" when only one class is present.
SvmResult fit_linear_svm(std::span<const Vec2> points, std::span<const int> labels,
                         const SvmConfig& cfg = {});

/// Fits the MSL on one label slice: left/right hemisphere pixel centers are
/// converted to mm, subsampled to at most cfg.subsample_per_class per class
/// (seeded), and fed to the SVM. Returns the normalized implicit line
/// w0*x + w1*y - b = 0 plus the raw SVM result.
struct MslFit {
    Line2D line;
    SvmResult svm;
};
MslFit msl_for_slice(const Mask2D& labels, double sx, double sy,
                     const SvmConfig& cfg = {});

/// Axis-aligned in-plane rectangle in mm.
struct RectMM {
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

/// Slice orientation anchors and the inferior-side sign convention.
/// B0/B1 are the MSL's intersections with the ROI border, C their midpoint
/// and Q the intersection of the normal through C with the border; a point P
/// is on the inferior side iff sign(cross(C - Q, P - C)) == inferior_sign.
struct Orientation {
    Vec2 b0, b1;
    Vec2 c, q;
    int inferior_sign = 0;
    bool consistent = true;
    bool from_cerebellum = false;

    Vec2 inferior_endpoint() const;
    Vec2 superior_endpoint() const;
    /// Unit vector along the MSL pointing toward the inferior side.
    Vec2 inferior_direction() const;
};

/// Both intersection points of a line with a rectangle border. Throws when
/// the line misses the rectangle or only grazes a corner.
std::pair<Vec2, Vec2> line_rect_intersections(const Line2D& line, const RectMM& rect);

/// Cross-product orientation test: samples k seeded cerebellum points, takes
/// the majority sign of cross(C - Q, P - C), and reports whether all sampled
/// signs agree.
Orientation slice_orientation(const Line2D& line, const RectMM& rect,
                              std::span<const Vec2> cerebellum_points_mm,
                              int k = 5, uint64_t seed = 0);

/// Propagates orientation from cerebellum-bearing slices to the rest by
/// matching MSL endpoints to the nearest labeled endpoints of the closest
/// cerebellum-bearing slice (closest inferior/superior points).
/// `lines` maps slice index -> MSL; `known` maps slice index -> orientation
/// derived from the cerebellum. Throws when `known` is empty.
std::map<int, Orientation> propagate_orientation(
    const std::map<int, Line2D>& lines, const std::map<int, Orientation>& known,
    const RectMM& rect);

}  // namespace fetbio
