#include "fetbio/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "fetbio/imageops.hpp"
#include "fetbio/measure.hpp"
#include "fetbio/roi.hpp"
#include "fetbio/rng.hpp"

namespace fetbio {

namespace {

std::vector<Vec2> cerebellum_points_mm(const Mask2D& labels, double sx, double sy) {
    std::vector<Vec2> pts;
    for (int y = 0; y < labels.h; ++y)
        for (int x = 0; x < labels.w; ++x)
            if (labels.at(x, y) == LabelMap::kCerebellum)
                pts.push_back({x * sx, y * sy});
    return pts;
}

bool has_class(const Mask2D& labels, uint8_t cls) {
    for (uint8_t v : labels.v)
        if (v == cls) return true;
    return false;
}

}  // namespace

PipelineReport run_pipeline(const Volume& vol, const LabelMap& labels,
                            const SliceProbabilities& probs_cbd,
                            const SliceProbabilities& probs_tcd,
                            const PipelineConfig& cfg) {
    vol.validate();
    labels.validate();
    if (!labels.dims_match(vol))
        throw Error("run_pipeline: volume and label dims mismatch");
    probs_cbd.validate(vol.nz);
    probs_tcd.validate(vol.nz);
    cfg.reliability.validate();

    PipelineReport report;
    report.n_slices = vol.nz;
    report.spacing_x = vol.sx;
    report.spacing_y = vol.sy;
    report.spacing_z = vol.sz;

    // stage 1: tight bounding box over all foreground classes
    const RoiBox roi = tight_bbox(
        labels, {LabelMap::kLeft, LabelMap::kRight, LabelMap::kCerebellum});
    const RectMM rect{roi.x0 * vol.sx, roi.y0 * vol.sy,
                      roi.x1 * vol.sx, roi.y1 * vol.sy};

    // stage 2: reference slice selection
    const Selection sel_cbd = select_reference(probs_cbd);
    const Selection sel_tcd = select_reference(probs_tcd);
    report.cbd_slice = sel_cbd.index;
    report.cbd_slice_prob = sel_cbd.probability;
    report.tcd_slice = sel_tcd.index;
    report.tcd_slice_prob = sel_tcd.probability;

    // stage 3 cleanup: keep the largest connected components per slice
    std::vector<Mask2D> cleaned(vol.nz);
    for (int z = 0; z < vol.nz; ++z) {
        Mask2D slice = label_slice(labels, z);
        Mask2D fg(slice.h, slice.w);
        for (size_t i = 0; i < slice.v.size(); ++i) fg.v[i] = slice.v[i] != 0;
        const Mask2D kept = keep_largest_components(fg, cfg.cleanup_components);
        for (size_t i = 0; i < slice.v.size(); ++i)
            if (!kept.v[i]) slice.v[i] = 0;
        cleaned[z] = std::move(slice);
    }

    // stage 4: per-slice MSL
    std::map<int, Line2D> lines;
    std::map<int, bool> converged;
    for (int z = 0; z < vol.nz; ++z) {
        if (!has_class(cleaned[z], LabelMap::kLeft) ||
            !has_class(cleaned[z], LabelMap::kRight))
            continue;
        SvmConfig svm = cfg.svm;
        svm.seed = Rng::mix(cfg.svm.seed, static_cast<uint64_t>(z));
        try {
            const MslFit fit = msl_for_slice(cleaned[z], vol.sx, vol.sy, svm);
            lines[z] = fit.line;
            converged[z] = fit.svm.converged;
        } catch (const Error& e) {
            report.errors.push_back("MSL failed on slice " + std::to_string(z) +
                                    ": " + e.what());
        }
    }

    // stage 4: orientation on cerebellum-bearing slices, then propagation
    std::map<int, Orientation> known;
    for (const auto& [z, line] : lines) {
        const auto cereb = cerebellum_points_mm(cleaned[z], vol.sx, vol.sy);
        if (cereb.empty()) continue;
        try {
            known[z] = slice_orientation(
                line, rect, cereb, cfg.reliability.orientation_samples,
                Rng::mix(cfg.reliability.seed, static_cast<uint64_t>(z)));
        } catch (const Error& e) {
            report.errors.push_back("orientation failed on slice " +
                                    std::to_string(z) + ": " + e.what());
        }
    }
    std::map<int, Orientation> orientations;
    if (!known.empty() && !lines.empty()) {
        orientations = propagate_orientation(lines, known, rect);
    } else if (!lines.empty()) {
        report.errors.push_back("orientation unavailable: no slice has a cerebellum");
    }

    for (const auto& [z, line] : lines) {
        SliceLine sl;
        sl.slice = z;
        sl.line = line;
        sl.angle_deg = line_angle_deg(line);
        sl.svm_converged = converged[z];
        if (auto it = orientations.find(z); it != orientations.end()) {
            sl.inferior_sign = it->second.inferior_sign;
            sl.consistent = it->second.consistent;
            sl.from_cerebellum = it->second.from_cerebellum;
        }
        report.msl.push_back(sl);
    }

    // stage 5: measurements on the selected reference slices
    const int kc = sel_cbd.index;
    if (!has_class(cleaned[kc], LabelMap::kLeft) ||
        !has_class(cleaned[kc], LabelMap::kRight))
        throw Error("run_pipeline: hemispheres absent on the selected CBD slice");

    Image2D cbd_img;
    if (lines.count(kc)) {
        try {
            Vec2 superior{0.0, -1.0};
            if (auto it = orientations.find(kc); it != orientations.end()) {
                superior = it->second.inferior_direction() * -1.0;
            }
            Measurement cbd = compute_cbd(cleaned[kc], vol.sx, vol.sy, lines.at(kc),
                                          superior, kc, cfg.bin_mm);
            if (!orientations.count(kc))
                cbd.notes.push_back("orientation unavailable; axis convention used");
            report.cbd = cbd;
        } catch (const Error& e) {
            report.errors.push_back(std::string("CBD failed: ") + e.what());
        }
    } else {
        report.errors.push_back("CBD failed: no MSL on the selected slice");
    }

    if (report.cbd) {
        cbd_img = volume_slice(vol, kc);
        try {
            report.bbd = compute_bbd(cbd_img, vol.sx, vol.sy, *report.cbd,
                                     cfg.bbd_tau_rel);
        } catch (const Error& e) {
            report.errors.push_back(std::string("BBD failed: ") + e.what());
        }
    } else {
        report.errors.push_back("BBD failed: CBD unavailable");
    }

    try {
        report.tcd = compute_tcd(cleaned[sel_tcd.index], vol.sx, vol.sy,
                                 sel_tcd.index);
    } catch (const Error& e) {
        report.errors.push_back(std::string("TCD failed: ") + e.what());
    }

    // reliability checks, fixed order for deterministic reports
    if (auto w = check_slice_confidence(sel_cbd, SliceTask::CBD_BBD, cfg.reliability))
        report.warnings.push_back(*w);
    if (auto w = check_slice_confidence(sel_tcd, SliceTask::TCD, cfg.reliability))
        report.warnings.push_back(*w);
    if (auto w = check_orientation_consistency(report.msl))
        report.warnings.push_back(*w);
    if (auto w = check_msl_smoothness(report.msl, cfg.reliability))
        report.warnings.push_back(*w);
    if (report.cbd) {
        if (auto w = check_bbd_stability(cbd_img, vol.sx, vol.sy, *report.cbd,
                                         report.bbd, cfg.bbd_tau_rel,
                                         cfg.reliability))
            report.warnings.push_back(*w);
    }
    if (report.tcd) {
        if (auto w = check_tcd_angles(*report.tcd, cfg.reliability))
            report.warnings.push_back(*w);
    }
    return report;
}

EvalStats run_eval(const std::vector<EvalRecord>& predictions,
                   const std::vector<ReferenceRow>& reference) {
    std::map<std::string, const ReferenceRow*> by_id;
    for (const ReferenceRow& r : reference) by_id[r.volume_id] = &r;

    std::vector<double> cbd_p, cbd_r, bbd_p, bbd_r, tcd_p, tcd_r;
    double acc_cbd = 0, acc_tcd = 0, dsum_cbd = 0, dsum_tcd = 0;
    int dmax_cbd = 0, dmax_tcd = 0;

    for (const EvalRecord& p : predictions) {
        auto it = by_id.find(p.volume_id);
        if (it == by_id.end())
            throw Error("run_eval: volume id '" + p.volume_id +
                        "' missing from the reference table");
        const ReferenceRow& r = *it->second;
        if (p.cbd_mm) { cbd_p.push_back(*p.cbd_mm); cbd_r.push_back(r.cbd_mm); }
        if (p.bbd_mm) { bbd_p.push_back(*p.bbd_mm); bbd_r.push_back(r.bbd_mm); }
        if (p.tcd_mm) { tcd_p.push_back(*p.tcd_mm); tcd_r.push_back(r.tcd_mm); }

        acc_cbd += slice_selection_accuracy(p.cbd_slice, r.cbd_slice, p.n_slices);
        acc_tcd += slice_selection_accuracy(p.tcd_slice, r.tcd_slice, p.n_slices);
        const int dc = std::abs(p.cbd_slice - r.cbd_slice);
        const int dt = std::abs(p.tcd_slice - r.tcd_slice);
        dsum_cbd += dc;
        dsum_tcd += dt;
        dmax_cbd = std::max(dmax_cbd, dc);
        dmax_tcd = std::max(dmax_tcd, dt);
    }
    if (predictions.empty()) throw Error("run_eval: no predictions");

    EvalStats stats;
    stats.n_volumes = predictions.size();
    if (cbd_p.size() >= 2) stats.cbd = bland_altman(cbd_p, cbd_r);
    if (bbd_p.size() >= 2) stats.bbd = bland_altman(bbd_p, bbd_r);
    if (tcd_p.size() >= 2) stats.tcd = bland_altman(tcd_p, tcd_r);
    const double n = static_cast<double>(predictions.size());
    stats.cbd_slice = {acc_cbd / n, dsum_cbd / n, dmax_cbd};
    stats.tcd_slice = {acc_tcd / n, dsum_tcd / n, dmax_tcd};
    return stats;
}

}  // namespace fetbio
