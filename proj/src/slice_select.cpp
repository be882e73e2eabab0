#include "fetbio/slice_select.hpp"

#include <algorithm>
#include <cmath>

#include "fetbio/rng.hpp"

namespace fetbio {

Selection select_reference(const SliceProbabilities& probs) {
    if (probs.p.empty()) throw Error("select_reference: empty probability vector");
    int best = 0;
    for (int i = 1; i < static_cast<int>(probs.p.size()); ++i)
        if (probs.p[i] > probs.p[best]) best = i;
    return {best, probs.p[best]};
}

PhantomProbabilitySource::PhantomProbabilitySource(int n_slices, int cbd_slice,
                                                   int tcd_slice, double noise,
                                                   double peak, uint64_t seed)
    : n_(n_slices), cbd_slice_(cbd_slice), tcd_slice_(tcd_slice),
      noise_(noise), peak_(peak), seed_(seed) {
    if (n_ <= 0) throw Error("PhantomProbabilitySource: no slices");
    if (cbd_slice_ < 0 || cbd_slice_ >= n_ || tcd_slice_ < 0 || tcd_slice_ >= n_)
        throw Error("PhantomProbabilitySource: peak slice out of range");
}

std::vector<double> PhantomProbabilitySource::clean_profile(int n_slices,
                                                            int peak_slice,
                                                            double peak) {
    std::vector<double> p(n_slices, 0.0);
    for (int i = 0; i < n_slices; ++i)
        p[i] = peak * std::max(0.0, 1.0 - std::abs(i - peak_slice) / 3.0);
    return p;
}

SliceProbabilities PhantomProbabilitySource::probabilities(SliceTask task) const {
    const int k = task == SliceTask::CBD_BBD ? cbd_slice_ : tcd_slice_;
    SliceProbabilities out;
    out.task = task;
    out.p = clean_profile(n_, k, peak_);
    if (noise_ > 0.0) {
        Rng rng(Rng::mix(seed_, task == SliceTask::CBD_BBD ? 1 : 2));
        for (double& v : out.p)
            v = std::clamp(v + noise_ * rng.next_double(), 0.0, 1.0);
    }
    return out;
}

}  // namespace fetbio
