#pragma once

#include <cstdint>

#include "fetbio/core.hpp"
#include "fetbio/slice_select.hpp"

// Synthetic fetal-head volume generator with analytic ground truth for
// CBD/BBD/TCD, the reference slices, the MSL and the brain orientation.
//
// Construction, in head-local coordinates (x = lateral, y = along the MSL
// with inferior positive, rotated by msl_angle_deg into the slice plane):
//   - cerebral "hemispheres": an egg of half-width hemi_b_mm, superior
//     semi-height hemi_a_mm and inferior semi-height
//     hemi_a_mm * inferior_elongation, split left/right by an
//     interhemispheric CSF gap. The longer inferior half puts the mass
//     center inferior of the fissure notch, as the fissure-search rule
//     requires, while the widest section stays at y = 0 so CBD = 2b.
//   - a symmetric width notch (the Sylvian fissure) carved at
//     fissure_offset_mm inferior of the widest section;
//   - CSF and skull shells built as enlarged eggs, so the inner skull
//     boundary along the CBD line sits at exactly b + csf_gap per side and
//     BBD = 2 (b + csf_gap);
//   - a cerebellum ellipsoid centered cereb_offset_mm inferior, whose
//     central slice carries the TCD = 2 * cereb_perp_mm.

namespace fetbio {

struct PhantomSpec {
    int nx = 160, ny = 160, nz = 24;
    double sx = 0.75, sy = 0.75, sz = 4.0;

    double msl_angle_deg = 0.0;  // head rotation; 0 = vertical MSL (90 deg line)

    double hemi_a_mm = 30.0;  // superior semi-height along the MSL
    double hemi_b_mm = 35.0;  // perpendicular semi-width (CBD = 2b)
    double hemi_c_mm = 30.0;  // through-slice semi-extent
    double inferior_elongation = 1.6;
    double gap_mm = 2.0;

    double fissure_offset_mm = 5.0;  // inferior of the widest section
    double fissure_depth_mm = 7.0;
    double fissure_width_mm = 5.0;

    double csf_gap_mm = 4.0;
    double skull_thickness_mm = 2.5;

    double cereb_offset_mm = 24.0;  // inferior offset of the cerebellum center
    double cereb_along_mm = 9.0;    // semi-axis along the MSL
    double cereb_perp_mm = 16.0;    // semi-axis perpendicular (TCD = 2 * this)
    double cereb_z_mm = 8.0;        // through-slice semi-extent
    int cereb_slice_offset = 3;     // cerebellum center slice minus cbd slice

    double intens_background = 0.05;
    double intens_parenchyma = 0.45;
    double intens_csf = 0.90;
    double intens_skull = 0.12;
    double intens_cerebellum = 0.50;

    double noise_sigma = 0.01;
    uint64_t seed = 1;

    void validate() const;

    /// Mass-center offset of the egg cross-section along the MSL (inferior
    /// positive): (4 / 3pi) * (a_inferior - a_superior).
    double centroid_offset_mm() const;
};

struct PhantomTruth {
    double cbd_mm = 0.0;
    double bbd_mm = 0.0;
    double tcd_mm = 0.0;
    int cbd_slice = -1;
    int tcd_slice = -1;
    Line2D msl;               // same line on every slice
    Vec2 inferior_direction;  // unit vector along the MSL toward the cerebellum
    Vec2 center_mm;           // head center in slice mm coordinates
};

struct PhantomResult {
    Volume volume;
    LabelMap labels;
    PhantomTruth truth;
    SliceProbabilities probs_cbd;  // clean unimodal profile, peak at cbd_slice
    SliceProbabilities probs_tcd;
};

/// Rasterizes the phantom. Bit-identical for equal specs (seed included).
PhantomResult generate(const PhantomSpec& spec);

}  // namespace fetbio
