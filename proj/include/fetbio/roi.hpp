#pragma once

#include <set>

#include "fetbio/core.hpp"
#include "fetbio/imageops.hpp"

namespace fetbio {

/// Per-slice square normalized crops of the brain window, plus the metadata
/// needed to map prepared coordinates back to volume pixel coordinates.
struct PreparedStack {
    std::vector<Image2D> slices;  // one per volume slice, all out x out
    int out = 224;
    // window origin and effective extent in volume pixels (may be clamped
    // to the volume near borders)
    int x0 = 0, y0 = 0;
    int win_w = 0, win_h = 0;

    /// prepared pixel -> volume pixel (align-corners resize inverse)
    Vec2 to_volume_px(const Vec2& p) const {
        const double sx = out > 1 ? static_cast<double>(win_w - 1) / (out - 1) : 0.0;
        const double sy = out > 1 ? static_cast<double>(win_h - 1) / (out - 1) : 0.0;
        return {x0 + p.x * sx, y0 + p.y * sy};
    }
    Vec2 to_prepared_px(const Vec2& vp) const {
        const double sx = win_w > 1 ? static_cast<double>(out - 1) / (win_w - 1) : 0.0;
        const double sy = win_h > 1 ? static_cast<double>(out - 1) / (win_h - 1) : 0.0;
        return {(vp.x - x0) * sx, (vp.y - y0) * sy};
    }
};

/// Minimal axis-aligned voxel box containing all voxels whose label is in
/// `classes`. Throws "no foreground" when the selection is empty.
RoiBox tight_bbox(const LabelMap& labels, const std::set<uint8_t>& classes);

/// Stage-2 slice preparation: a square in-plane window of side
/// s = round(factor * max(h, w)) centered on the ROI center (clamped by
/// shifting inward at volume borders), cropped per slice, bilinear-resized
/// to out x out, then normalized once per volume with a single min/max over
/// the whole cropped stack.
PreparedStack prepare_slices(const Volume& vol, const RoiBox& roi,
                             double factor = 1.5, int out = 224);

}  // namespace fetbio
