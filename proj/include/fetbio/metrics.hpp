#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "fetbio/core.hpp"
#include "fetbio/imageops.hpp"

// Evaluation statistics for comparing measurement sets, slice selections,
// MSL angles and segmentations.

namespace fetbio {

struct AgreementStats {
    double bias = 0.0;
    double ci95 = 0.0;           // 1.96 * population std of paired differences
    double mean_abs_diff = 0.0;
    size_t n = 0;
};

inline double diff(double l1, double l2) { return std::abs(l1 - l2); }

inline double slice_selection_accuracy(int s1, int s2, int n_slices) {
    if (n_slices < 1) throw Error("slice_selection_accuracy: N must be >= 1");
    return 1.0 - std::abs(s1 - s2) / static_cast<double>(n_slices);
}

/// Folded undirected angle difference in [0, 90].
inline double msl_angle_diff(double a1, double a2) {
    double d = std::abs(a1 - a2);
    d = std::fmod(d, 180.0);
    return std::min(d, 180.0 - d);
}

/// Bland-Altman agreement between paired measurement sets. The CI95 uses the
/// population (1/n) standard deviation convention.
inline AgreementStats bland_altman(std::span<const double> set1,
                                   std::span<const double> set2) {
    if (set1.size() != set2.size()) throw Error("bland_altman: length mismatch");
    const size_t n = set1.size();
    if (n < 2) throw Error("bland_altman: need at least 2 pairs");
    double sum = 0.0, abs_sum = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double d = set1[i] - set2[i];
        sum += d;
        abs_sum += std::abs(d);
    }
    const double bias = sum / n;
    double var = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double d = set1[i] - set2[i] - bias;
        var += d * d;
    }
    var /= n;
    return {bias, 1.96 * std::sqrt(var), abs_sum / n, n};
}

/// Dice overlap 2|A^B| / (|A| + |B|); two empty masks count as 1.0.
inline double dice(const Mask2D& a, const Mask2D& b) {
    if (a.h != b.h || a.w != b.w) throw Error("dice: dimension mismatch");
    size_t na = 0, nb = 0, inter = 0;
    for (size_t i = 0; i < a.v.size(); ++i) {
        const bool ia = a.v[i] != 0, ib = b.v[i] != 0;
        na += ia;
        nb += ib;
        inter += ia && ib;
    }
    if (na + nb == 0) return 1.0;
    return 2.0 * inter / static_cast<double>(na + nb);
}

}  // namespace fetbio
