#pragma once

#include <optional>
#include <vector>

#include "fetbio/core.hpp"
#include "fetbio/imageops.hpp"
#include "fetbio/measure.hpp"
#include "fetbio/msl.hpp"
#include "fetbio/slice_select.hpp"

// Self-assessment of computation reliability: five checks whose warnings are
// aggregated into the pipeline report. All threshold comparisons are strict
// so boundary cases are deterministic.

namespace fetbio {

struct ReliabilityConfig {
    double slice_prob_threshold = 0.5;
    int orientation_samples = 5;
    double msl_adjacent_angle_deg = 10.0;
    double bbd_clahe_diff_mm = 2.0;
    double tcd_angle_deg = 10.0;
    int clahe_tile_h = 20;
    int clahe_tile_w = 20;
    double clahe_clip = 0.01;
    uint64_t seed = 0;

    void validate() const {
        if (slice_prob_threshold <= 0 || msl_adjacent_angle_deg <= 0 ||
            bbd_clahe_diff_mm <= 0 || tcd_angle_deg <= 0 || clahe_clip <= 0)
            throw Error("ReliabilityConfig: thresholds must be > 0");
        if (orientation_samples < 2)
            throw Error("ReliabilityConfig: need at least 2 orientation samples");
    }
};

/// Warning iff the selected slice's probability is strictly below the
/// threshold.
std::optional<ReliabilityWarning> check_slice_confidence(
    const Selection& sel, SliceTask task, const ReliabilityConfig& cfg);

/// Warning iff any cerebellum-derived orientation had disagreeing
/// cross-product signs.
std::optional<ReliabilityWarning> check_orientation_consistency(
    const std::vector<SliceLine>& slices);

/// Warning iff the folded MSL angles of adjacent slices differ by more than
/// the configured threshold (also covers SVM non-convergence on a slice).
std::optional<ReliabilityWarning> check_msl_smoothness(
    const std::vector<SliceLine>& slices, const ReliabilityConfig& cfg);

/// Recomputes the BBD on the CLAHE-enhanced slice; warning iff the values
/// differ by more than the configured tolerance or either computation fails.
std::optional<ReliabilityWarning> check_bbd_stability(
    const Image2D& img, double sx, double sy, const Measurement& cbd,
    const std::optional<Measurement>& bbd, double tau_rel,
    const ReliabilityConfig& cfg);

/// Warning iff the hull-diameter angle and the min-area-rect long-axis angle
/// of the TCD differ by more than the configured threshold (folded).
std::optional<ReliabilityWarning> check_tcd_angles(
    const Measurement& tcd, const ReliabilityConfig& cfg);

}  // namespace fetbio
