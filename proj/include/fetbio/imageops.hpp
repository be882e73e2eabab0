#pragma once

#include <utility>
#include <vector>

#include "fetbio/core.hpp"

// 2D image primitives shared across the pipeline: resampling, normalization,
// the logit-domain brightness/contrast adjustments, CLAHE, intensity profile
// sampling along a ray, and connected-component cleanup.

namespace fetbio {

/// Row-major scalar image, h rows by w columns.
struct Image2D {
    int h = 0, w = 0;
    std::vector<double> v;

    Image2D() = default;
    Image2D(int h_, int w_, double fill = 0.0)
        : h(h_), w(w_), v(static_cast<size_t>(h_) * w_, fill) {
        if (h_ <= 0 || w_ <= 0) throw Error("Image2D: non-positive dims");
    }

    double at(int x, int y) const { return v[static_cast<size_t>(y) * w + x]; }
    double& at(int x, int y) { return v[static_cast<size_t>(y) * w + x]; }

    /// Bilinear sample at fractional pixel coordinates. (px, py) must lie in
    /// [0, w-1] x [0, h-1].
    double sample(double px, double py) const;
};

/// Row-major byte mask / label slice.
struct Mask2D {
    int h = 0, w = 0;
    std::vector<uint8_t> v;

    Mask2D() = default;
    Mask2D(int h_, int w_, uint8_t fill = 0)
        : h(h_), w(w_), v(static_cast<size_t>(h_) * w_, fill) {}

    uint8_t at(int x, int y) const { return v[static_cast<size_t>(y) * w + x]; }
    uint8_t& at(int x, int y) { return v[static_cast<size_t>(y) * w + x]; }
};

/// Ordered samples along a ray: position along the ray in mm, value.
/// Positions are strictly increasing.
struct Profile {
    std::vector<double> position_mm;
    std::vector<double> value;
};

Image2D volume_slice(const Volume& vol, int z);
Mask2D label_slice(const LabelMap& labels, int z);

/// Align-corners bilinear resampling: corner pixel centers map to corner
/// pixel centers.
Image2D bilinear_resize(const Image2D& img, int out_h, int out_w);

/// (v - min) / (max - min); a constant image maps to all zeros.
Image2D normalize01(const Image2D& img);

/// sigmoid(logit(p) + logit(c)) per pixel; img must be normalized to [0,1].
/// c = 0.5 is the identity.
Image2D adjust_brightness(const Image2D& img, double c);

/// sigmoid(logit(p) * c) per pixel; img must be normalized to [0,1].
/// c = 1 is the identity.
Image2D adjust_contrast(const Image2D& img, double c);

/// Contrast-limited adaptive histogram equalization over a tile grid.
/// 256-bin per-tile histograms; the per-bin clip limit is `clip` (a fraction
/// in (0,1]) times the tile pixel count, with the clipped excess
/// redistributed uniformly in one pass. Each pixel blends the CDF mappings
/// of the four surrounding tiles bilinearly. Mapping range is anchored to
/// the global image min/max, so a constant image is a fixed point and the
/// output stays within [0,1] for normalized input.
Image2D clahe(const Image2D& img, int tile_h, int tile_w, double clip);

/// Samples the image from p0 toward p1 at steps of step_mm (bilinear) and
/// returns the intensity profile plus its central-difference derivative
/// (one-sided at the ends). Pixel (i, j) center sits at mm (i*sx, j*sy).
/// Throws if the ray leaves the image domain before reaching p1.
std::pair<Profile, Profile> line_intensity_derivative(
    const Image2D& img, double sx, double sy,
    const Vec2& p0_mm, const Vec2& p1_mm, double step_mm);

/// Keeps the k largest 8-connected components of mask (nonzero = foreground).
/// An empty mask passes through unchanged.
Mask2D keep_largest_components(const Mask2D& mask, int k);

/// Angle helpers for undirected lines: fold an angle in degrees to [0, 180).
double fold_angle_180(double deg);

/// Undirected angle of the line direction vs. the +x axis, in [0, 180).
double line_angle_deg(const Line2D& line);

}  // namespace fetbio
