#pragma once

#include <cstdint>
#include <vector>

#include "fetbio/core.hpp"

namespace fetbio {

enum class SliceTask { CBD_BBD, TCD };

inline const char* to_string(SliceTask t) {
    return t == SliceTask::CBD_BBD ? "cbd_bbd" : "tcd";
}

/// Per-slice reference probabilities for one selection task.
struct SliceProbabilities {
    SliceTask task = SliceTask::CBD_BBD;
    std::vector<double> p;  // one value in [0,1] per slice

    void validate(int nz) const {
        if (static_cast<int>(p.size()) != nz)
            throw Error("SliceProbabilities: length does not match slice count");
        for (double v : p)
            if (v < 0.0 || v > 1.0)
                throw Error("SliceProbabilities: value outside [0,1]");
    }
};

struct Selection {
    int index = -1;
    double probability = 0.0;
};

/// Argmax slice; ties break toward the lowest index.
Selection select_reference(const SliceProbabilities& probs);

/// Abstract provider of per-slice reference probabilities. Ships with a
/// file-backed source (precomputed sidecar) and a phantom source; a CNN
/// backend would be a third implementation.
class ProbabilitySource {
public:
    virtual ~ProbabilitySource() = default;
    virtual SliceProbabilities probabilities(SliceTask task) const = 0;
};

/// Wraps precomputed probability vectors (e.g. read from a sidecar file).
class FileProbabilitySource : public ProbabilitySource {
public:
    FileProbabilitySource(SliceProbabilities cbd_bbd, SliceProbabilities tcd)
        : cbd_bbd_(std::move(cbd_bbd)), tcd_(std::move(tcd)) {}
    SliceProbabilities probabilities(SliceTask task) const override {
        return task == SliceTask::CBD_BBD ? cbd_bbd_ : tcd_;
    }

private:
    SliceProbabilities cbd_bbd_;
    SliceProbabilities tcd_;
};

/// Emits a unimodal profile peaked at the ground-truth slice:
///   p_i = peak * max(0, 1 - |i - k*| / 3) + uniform(0, noise)
/// clamped into [0,1]. `peak` below the confidence threshold exercises the
/// slice-confidence warning; `noise` exercises near-miss selection.
class PhantomProbabilitySource : public ProbabilitySource {
public:
    PhantomProbabilitySource(int n_slices, int cbd_slice, int tcd_slice,
                             double noise = 0.05, double peak = 1.0,
                             uint64_t seed = 0);
    SliceProbabilities probabilities(SliceTask task) const override;

    static std::vector<double> clean_profile(int n_slices, int peak_slice,
                                             double peak = 1.0);

private:
    int n_;
    int cbd_slice_;
    int tcd_slice_;
    double noise_;
    double peak_;
    uint64_t seed_;
};

}  // namespace fetbio
