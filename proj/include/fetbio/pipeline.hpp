#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fetbio/core.hpp"
#include "fetbio/metrics.hpp"
#include "fetbio/msl.hpp"
#include "fetbio/reliability.hpp"
#include "fetbio/slice_select.hpp"

// Five-stage pipeline orchestration: bounding box -> reference slice
// selection -> per-slice segmentation cleanup -> MSL + orientation ->
// measurements, followed by the reliability checks.

namespace fetbio {

struct PipelineConfig {
    SvmConfig svm;
    ReliabilityConfig reliability;
    double bbd_tau_rel = 0.2;
    int cleanup_components = 3;
    double bin_mm = 0.0;  // width-profile bin; 0 = min in-plane spacing
};

/// Runs the full pipeline on one volume. Hard input errors (dimension
/// mismatch, missing hemispheres on the selected slice) throw; stage
/// failures downgrade to absent measurements with warnings/error entries.
PipelineReport run_pipeline(const Volume& vol, const LabelMap& labels,
                            const SliceProbabilities& probs_cbd,
                            const SliceProbabilities& probs_tcd,
                            const PipelineConfig& cfg = {});

/// Measurement row extracted from one report for evaluation.
struct EvalRecord {
    std::string volume_id;
    std::optional<double> cbd_mm, bbd_mm, tcd_mm;
    int cbd_slice = -1;
    int tcd_slice = -1;
    int n_slices = 0;
};

/// Ground-truth / second-observer row (the reference CSV schema).
struct ReferenceRow {
    std::string volume_id;
    double cbd_mm = 0, bbd_mm = 0, tcd_mm = 0;
    int cbd_slice = -1;
    int tcd_slice = -1;
};

struct SliceAgreement {
    double accuracy_mean = 0.0;
    double diff_mean = 0.0;
    int diff_max = 0;
};

struct EvalStats {
    AgreementStats cbd, bbd, tcd;  // prediction minus reference
    SliceAgreement cbd_slice, tcd_slice;
    size_t n_volumes = 0;
};

/// Bland-Altman agreement per measurement kind plus slice-selection metrics.
/// Throws when a prediction's volume id is missing from the reference.
EvalStats run_eval(const std::vector<EvalRecord>& predictions,
                   const std::vector<ReferenceRow>& reference);

}  // namespace fetbio
