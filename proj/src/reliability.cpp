#include "fetbio/reliability.hpp"

#include <cmath>
#include <sstream>

namespace fetbio {

namespace {

double fold_diff_deg(double a, double b) {
    double d = std::abs(a - b);
    d = std::fmod(d, 180.0);
    return std::min(d, 180.0 - d);
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(3);
    os << std::fixed << v;
    return os.str();
}

}  // namespace

std::optional<ReliabilityWarning> check_slice_confidence(
    const Selection& sel, SliceTask task, const ReliabilityConfig& cfg) {
    if (sel.probability < cfg.slice_prob_threshold) {
        const WarningCode code = task == SliceTask::CBD_BBD
                                     ? WarningCode::SLICE_CONF_CBD
                                     : WarningCode::SLICE_CONF_TCD;
        return ReliabilityWarning{
            code, "slice " + std::to_string(sel.index) + " probability " +
                      fmt(sel.probability) + " below threshold " +
                      fmt(cfg.slice_prob_threshold)};
    }
    return std::nullopt;
}

std::optional<ReliabilityWarning> check_orientation_consistency(
    const std::vector<SliceLine>& slices) {
    std::string bad;
    for (const SliceLine& s : slices) {
        if (s.from_cerebellum && !s.consistent) {
            if (!bad.empty()) bad += ",";
            bad += std::to_string(s.slice);
        }
    }
    if (bad.empty()) return std::nullopt;
    return ReliabilityWarning{WarningCode::ORIENT_INCONSISTENT,
                              "cerebellum orientation signs disagree on slice(s) " + bad};
}

std::optional<ReliabilityWarning> check_msl_smoothness(
    const std::vector<SliceLine>& slices, const ReliabilityConfig& cfg) {
    for (const SliceLine& s : slices)
        if (!s.svm_converged)
            return ReliabilityWarning{
                WarningCode::MSL_ROUGH,
                "SVM did not converge on slice " + std::to_string(s.slice)};
    for (size_t i = 0; i + 1 < slices.size(); ++i) {
        if (slices[i + 1].slice != slices[i].slice + 1) continue;
        const double d = fold_diff_deg(slices[i].angle_deg, slices[i + 1].angle_deg);
        if (d > cfg.msl_adjacent_angle_deg)
            return ReliabilityWarning{
                WarningCode::MSL_ROUGH,
                "MSL angle jump " + fmt(d) + " deg between slices " +
                    std::to_string(slices[i].slice) + " and " +
                    std::to_string(slices[i + 1].slice)};
    }
    return std::nullopt;
}

std::optional<ReliabilityWarning> check_bbd_stability(
    const Image2D& img, double sx, double sy, const Measurement& cbd,
    const std::optional<Measurement>& bbd, double tau_rel,
    const ReliabilityConfig& cfg) {
    if (!bbd) {
        return ReliabilityWarning{WarningCode::BBD_UNSTABLE,
                                  "BBD unavailable on the original slice"};
    }
    std::optional<Measurement> enhanced_bbd;
    try {
        const Image2D enhanced =
            clahe(normalize01(img), cfg.clahe_tile_h, cfg.clahe_tile_w, cfg.clahe_clip);
        enhanced_bbd = compute_bbd(enhanced, sx, sy, cbd, tau_rel);
    } catch (const Error&) {
        return ReliabilityWarning{WarningCode::BBD_UNSTABLE,
                                  "BBD failed on the CLAHE-enhanced slice"};
    }
    const double d = std::abs(bbd->value_mm - enhanced_bbd->value_mm);
    if (d > cfg.bbd_clahe_diff_mm)
        return ReliabilityWarning{
            WarningCode::BBD_UNSTABLE,
            "BBD differs by " + fmt(d) + " mm on the CLAHE-enhanced slice"};
    return std::nullopt;
}

std::optional<ReliabilityWarning> check_tcd_angles(
    const Measurement& tcd, const ReliabilityConfig& cfg) {
    if (!tcd.hull_angle_deg || !tcd.rect_angle_deg)
        return std::nullopt;
    const double d = fold_diff_deg(*tcd.hull_angle_deg, *tcd.rect_angle_deg);
    if (d > cfg.tcd_angle_deg)
        return ReliabilityWarning{
            WarningCode::TCD_ANGLES,
            "hull-diameter and bounding-box long-axis angles differ by " +
                fmt(d) + " deg"};
    return std::nullopt;
}

}  // namespace fetbio
