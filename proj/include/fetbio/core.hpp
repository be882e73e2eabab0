#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

// Core domain types and coordinate conventions.
//
// Pixel convention: x = column, y = row, origin at the top-left of a slice;
// z indexes slices (the acquisition stack axis). All geometry downstream of
// the loaders is done in millimeter coordinates: pixel indices are scaled by
// the in-plane spacing immediately, so anisotropic spacing needs no
// per-formula correction. Anatomical superior/inferior is decided by the
// orientation algorithm, never by an axis convention.

namespace fetbio {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double px, double py) : x(px), y(py) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::sqrt(x * x + y * y); }
};

inline Vec2 voxel_to_mm(const Vec2& p, double sx, double sy) {
    return {p.x * sx, p.y * sy};
}

inline double length_mm(const Vec2& p0, const Vec2& p1) {
    return (p1 - p0).norm();
}

/// Implicit in-plane line a*x + b*y + c = 0 in slice mm coordinates,
/// normalized so a^2 + b^2 = 1. Undirected: negating all coefficients
/// describes the same line.
struct Line2D {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    static Line2D normalized(double a, double b, double c) {
        const double n = std::sqrt(a * a + b * b);
        if (n <= 0.0) throw Error("Line2D: zero normal");
        return {a / n, b / n, c / n};
    }

    double signed_distance(const Vec2& p) const { return a * p.x + b * p.y + c; }
    Vec2 normal() const { return {a, b}; }
    Vec2 direction() const { return {-b, a}; }

    /// Point on the line whose projection onto direction() equals t.
    Vec2 point_at(double t) const {
        // foot of the origin plus t along the direction
        return Vec2{-a * c, -b * c} + direction() * t;
    }
};

/// 3D scalar grid with anisotropic voxel spacing in mm. Raster order is
/// x-fastest, z-slowest; the slice axis is z (coronal stack).
struct Volume {
    int nx = 0, ny = 0, nz = 0;
    double sx = 1.0, sy = 1.0, sz = 1.0;
    std::vector<float> voxels;

    Volume() = default;
    Volume(int nx_, int ny_, int nz_, double sx_, double sy_, double sz_)
        : nx(nx_), ny(ny_), nz(nz_), sx(sx_), sy(sy_), sz(sz_),
          voxels(static_cast<size_t>(nx_) * ny_ * nz_, 0.0f) {
        validate();
    }

    void validate() const {
        if (nx <= 0 || ny <= 0 || nz <= 0) throw Error("Volume: non-positive dims");
        if (sx <= 0 || sy <= 0 || sz <= 0) throw Error("Volume: non-positive spacing");
        if (voxels.size() != static_cast<size_t>(nx) * ny * nz)
            throw Error("Volume: voxel count does not match dims");
    }

    size_t index(int x, int y, int z) const {
        return (static_cast<size_t>(z) * ny + y) * nx + x;
    }
    float at(int x, int y, int z) const { return voxels[index(x, y, z)]; }
    float& at(int x, int y, int z) { return voxels[index(x, y, z)]; }
};

/// Label grid aligned to a Volume. Classes: 0 background, 1 left hemisphere,
/// 2 right hemisphere, 3 cerebellum.
struct LabelMap {
    static constexpr uint8_t kBackground = 0;
    static constexpr uint8_t kLeft = 1;
    static constexpr uint8_t kRight = 2;
    static constexpr uint8_t kCerebellum = 3;

    int nx = 0, ny = 0, nz = 0;
    double sx = 1.0, sy = 1.0, sz = 1.0;
    std::vector<uint8_t> labels;

    LabelMap() = default;
    LabelMap(int nx_, int ny_, int nz_, double sx_, double sy_, double sz_)
        : nx(nx_), ny(ny_), nz(nz_), sx(sx_), sy(sy_), sz(sz_),
          labels(static_cast<size_t>(nx_) * ny_ * nz_, 0) {}

    void validate() const {
        if (nx <= 0 || ny <= 0 || nz <= 0) throw Error("LabelMap: non-positive dims");
        if (labels.size() != static_cast<size_t>(nx) * ny * nz)
            throw Error("LabelMap: label count does not match dims");
        for (uint8_t v : labels)
            if (v > 3) throw Error("LabelMap: label value outside {0,1,2,3}");
    }

    bool dims_match(const Volume& v) const {
        return nx == v.nx && ny == v.ny && nz == v.nz;
    }

    size_t index(int x, int y, int z) const {
        return (static_cast<size_t>(z) * ny + y) * nx + x;
    }
    uint8_t at(int x, int y, int z) const { return labels[index(x, y, z)]; }
    uint8_t& at(int x, int y, int z) { return labels[index(x, y, z)]; }
};

/// Axis-aligned voxel-index box, inclusive on both ends.
struct RoiBox {
    int x0 = 0, x1 = -1;
    int y0 = 0, y1 = -1;
    int z0 = 0, z1 = -1;

    int width() const { return x1 - x0 + 1; }   // in-plane w
    int height() const { return y1 - y0 + 1; }  // in-plane h
    int depth() const { return z1 - z0 + 1; }
};

enum class MeasureKind { CBD, BBD, TCD };

inline const char* to_string(MeasureKind k) {
    switch (k) {
        case MeasureKind::CBD: return "CBD";
        case MeasureKind::BBD: return "BBD";
        case MeasureKind::TCD: return "TCD";
    }
    return "?";
}

/// One linear measurement: endpoints in slice mm coordinates, value in mm.
struct Measurement {
    MeasureKind kind = MeasureKind::CBD;
    int slice_index = -1;
    Vec2 endpoint_a;
    Vec2 endpoint_b;
    double value_mm = 0.0;

    // auxiliary results carried for reliability checks / reporting
    std::optional<double> fissure_t_mm;    // CBD: fissure position along the MSL
    std::optional<double> hull_angle_deg;  // TCD: hull-diameter line angle
    std::optional<double> rect_angle_deg;  // TCD: min-area rect long-axis angle
    std::vector<std::string> notes;
};

enum class WarningCode {
    SLICE_CONF_CBD,
    SLICE_CONF_TCD,
    ORIENT_INCONSISTENT,
    MSL_ROUGH,
    BBD_UNSTABLE,
    TCD_ANGLES,
};

inline const char* to_string(WarningCode c) {
    switch (c) {
        case WarningCode::SLICE_CONF_CBD: return "SLICE_CONF_CBD";
        case WarningCode::SLICE_CONF_TCD: return "SLICE_CONF_TCD";
        case WarningCode::ORIENT_INCONSISTENT: return "ORIENT_INCONSISTENT";
        case WarningCode::MSL_ROUGH: return "MSL_ROUGH";
        case WarningCode::BBD_UNSTABLE: return "BBD_UNSTABLE";
        case WarningCode::TCD_ANGLES: return "TCD_ANGLES";
    }
    return "?";
}

struct ReliabilityWarning {
    WarningCode code;
    std::string detail;
};

/// Per-slice mid-sagittal line with the orientation convention attached.
struct SliceLine {
    int slice = -1;
    Line2D line;
    double angle_deg = 0.0;
    int inferior_sign = 0;       // sign of cross(C-Q, P-C) for inferior points
    bool consistent = true;      // cerebellum sampling agreement (true if propagated)
    bool from_cerebellum = false;
    bool svm_converged = true;
};

/// Assembled pipeline output: measurements, per-slice MSL, warnings and
/// provenance. Absent measurements always come with an explaining entry.
struct PipelineReport {
    std::optional<Measurement> cbd;
    std::optional<Measurement> bbd;
    std::optional<Measurement> tcd;

    int cbd_slice = -1;
    double cbd_slice_prob = 0.0;
    int tcd_slice = -1;
    double tcd_slice_prob = 0.0;

    std::vector<SliceLine> msl;
    std::vector<ReliabilityWarning> warnings;
    std::vector<std::string> errors;

    int n_slices = 0;
    double spacing_x = 1.0, spacing_y = 1.0, spacing_z = 1.0;
    std::string volume_id;
    std::string volume_path;
    std::string labels_path;
    std::string probs_path;
};

}  // namespace fetbio
