#include "fetbio/imageops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fetbio {

namespace {

constexpr double kLogitEps = 1e-6;

double logit(double p) {
    p = std::clamp(p, kLogitEps, 1.0 - kLogitEps);
    return std::log(p / (1.0 - p));
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

double Image2D::sample(double px, double py) const {
    const int x0 = static_cast<int>(std::floor(px));
    const int y0 = static_cast<int>(std::floor(py));
    const int x1 = std::min(x0 + 1, w - 1);
    const int y1 = std::min(y0 + 1, h - 1);
    const double fx = px - x0;
    const double fy = py - y0;
    const double v00 = at(x0, y0), v10 = at(x1, y0);
    const double v01 = at(x0, y1), v11 = at(x1, y1);
    const double top = v00 + fx * (v10 - v00);
    const double bot = v01 + fx * (v11 - v01);
    return top + fy * (bot - top);
}

Image2D volume_slice(const Volume& vol, int z) {
    if (z < 0 || z >= vol.nz) throw Error("volume_slice: slice index out of range");
    Image2D out(vol.ny, vol.nx);
    for (int y = 0; y < vol.ny; ++y)
        for (int x = 0; x < vol.nx; ++x)
            out.at(x, y) = vol.at(x, y, z);
    return out;
}

Mask2D label_slice(const LabelMap& labels, int z) {
    if (z < 0 || z >= labels.nz) throw Error("label_slice: slice index out of range");
    Mask2D out(labels.ny, labels.nx);
    for (int y = 0; y < labels.ny; ++y)
        for (int x = 0; x < labels.nx; ++x)
            out.at(x, y) = labels.at(x, y, z);
    return out;
}

Image2D bilinear_resize(const Image2D& img, int out_h, int out_w) {
    if (out_h <= 0 || out_w <= 0) throw Error("bilinear_resize: non-positive dims");
    Image2D out(out_h, out_w);
    const double sx = out_w > 1 ? static_cast<double>(img.w - 1) / (out_w - 1) : 0.0;
    const double sy = out_h > 1 ? static_cast<double>(img.h - 1) / (out_h - 1) : 0.0;
    for (int y = 0; y < out_h; ++y) {
        const double py = y * sy;
        for (int x = 0; x < out_w; ++x)
            out.at(x, y) = img.sample(x * sx, py);
    }
    return out;
}

Image2D normalize01(const Image2D& img) {
    const auto [mn_it, mx_it] = std::minmax_element(img.v.begin(), img.v.end());
    const double mn = *mn_it, mx = *mx_it;
    Image2D out(img.h, img.w);
    if (mx <= mn) return out;  // constant input: all zeros
    const double inv = 1.0 / (mx - mn);
    for (size_t i = 0; i < img.v.size(); ++i) out.v[i] = (img.v[i] - mn) * inv;
    return out;
}

Image2D adjust_brightness(const Image2D& img, double c) {
    if (!(c > 0.0 && c < 1.0)) throw Error("adjust_brightness: c must be in (0,1)");
    const double lc = logit(c);
    Image2D out(img.h, img.w);
    for (size_t i = 0; i < img.v.size(); ++i) out.v[i] = sigmoid(logit(img.v[i]) + lc);
    return out;
}

Image2D adjust_contrast(const Image2D& img, double c) {
    if (!(c > 0.0)) throw Error("adjust_contrast: c must be > 0");
    Image2D out(img.h, img.w);
    for (size_t i = 0; i < img.v.size(); ++i) out.v[i] = sigmoid(logit(img.v[i]) * c);
    return out;
}

namespace {

constexpr int kClaheBins = 256;

struct TileGrid {
    int n;                    // tiles along the axis
    std::vector<int> start;   // first pixel of each tile
    std::vector<int> size;    // tile extent (last tile may be short)
    std::vector<double> center;
};

TileGrid make_grid(int extent, int tile) {
    TileGrid g;
    g.n = (extent + tile - 1) / tile;
    for (int i = 0; i < g.n; ++i) {
        const int s = i * tile;
        const int e = std::min(s + tile, extent);
        g.start.push_back(s);
        g.size.push_back(e - s);
        g.center.push_back(0.5 * (s + e - 1));
    }
    return g;
}

}  // namespace

Image2D clahe(const Image2D& img, int tile_h, int tile_w, double clip) {
    if (tile_h <= 0 || tile_w <= 0) throw Error("clahe: non-positive tile dims");
    if (!(clip > 0.0 && clip <= 1.0)) throw Error("clahe: clip must be in (0,1]");

    const auto [mn_it, mx_it] = std::minmax_element(img.v.begin(), img.v.end());
    const double mn = *mn_it, mx = *mx_it;
    if (mx <= mn) return img;  // constant image maps to itself

    const double bin_scale = kClaheBins / (mx - mn);
    auto bin_of = [&](double v) {
        int b = static_cast<int>((v - mn) * bin_scale);
        return std::clamp(b, 0, kClaheBins - 1);
    };

    const TileGrid gx = make_grid(img.w, tile_w);
    const TileGrid gy = make_grid(img.h, tile_h);

    // per-tile clipped-CDF mapping from bin index to [0,1]
    std::vector<std::vector<double>> maps(static_cast<size_t>(gx.n) * gy.n);
    for (int ty = 0; ty < gy.n; ++ty) {
        for (int tx = 0; tx < gx.n; ++tx) {
            std::vector<double> hist(kClaheBins, 0.0);
            const int npix = gx.size[tx] * gy.size[ty];
            for (int y = gy.start[ty]; y < gy.start[ty] + gy.size[ty]; ++y)
                for (int x = gx.start[tx]; x < gx.start[tx] + gx.size[tx]; ++x)
                    hist[bin_of(img.at(x, y))] += 1.0;

            const double limit = std::max(1.0, clip * npix);
            double excess = 0.0;
            for (double& hv : hist) {
                if (hv > limit) {
                    excess += hv - limit;
                    hv = limit;
                }
            }
            const double bonus = excess / kClaheBins;
            for (double& hv : hist) hv += bonus;

            std::vector<double> map(kClaheBins);
            double cum = 0.0;
            for (int b = 0; b < kClaheBins; ++b) {
                cum += hist[b];
                map[b] = cum / npix;
            }
            maps[static_cast<size_t>(ty) * gx.n + tx] = std::move(map);
        }
    }

    auto lookup = [&](int tx, int ty, int b) {
        return maps[static_cast<size_t>(ty) * gx.n + tx][b];
    };

    // blend the four surrounding tile mappings bilinearly per pixel,
    // clamping outside the tile-center lattice
    Image2D out(img.h, img.w);
    for (int y = 0; y < img.h; ++y) {
        int ty0 = 0;
        while (ty0 + 1 < gy.n && gy.center[ty0 + 1] <= y) ++ty0;
        int ty1 = std::min(ty0 + 1, gy.n - 1);
        double fy = 0.0;
        if (y <= gy.center[ty0]) {
            ty1 = ty0;
        } else if (ty1 != ty0) {
            fy = (y - gy.center[ty0]) / (gy.center[ty1] - gy.center[ty0]);
            if (fy > 1.0) { ty0 = ty1; fy = 0.0; }
        }
        for (int x = 0; x < img.w; ++x) {
            int tx0 = 0;
            while (tx0 + 1 < gx.n && gx.center[tx0 + 1] <= x) ++tx0;
            int tx1 = std::min(tx0 + 1, gx.n - 1);
            double fx = 0.0;
            if (x <= gx.center[tx0]) {
                tx1 = tx0;
            } else if (tx1 != tx0) {
                fx = (x - gx.center[tx0]) / (gx.center[tx1] - gx.center[tx0]);
                if (fx > 1.0) { tx0 = tx1; fx = 0.0; }
            }
            const int b = bin_of(img.at(x, y));
            const double top = (1.0 - fx) * lookup(tx0, ty0, b) + fx * lookup(tx1, ty0, b);
            const double bot = (1.0 - fx) * lookup(tx0, ty1, b) + fx * lookup(tx1, ty1, b);
            const double u = (1.0 - fy) * top + fy * bot;
            out.at(x, y) = mn + (mx - mn) * u;
        }
    }
    return out;
}

std::pair<Profile, Profile> line_intensity_derivative(
    const Image2D& img, double sx, double sy,
    const Vec2& p0_mm, const Vec2& p1_mm, double step_mm) {
    if (step_mm <= 0.0) throw Error("line_intensity_derivative: step must be > 0");
    const double len = length_mm(p0_mm, p1_mm);
    const Vec2 dir = len > 0.0 ? (p1_mm - p0_mm) * (1.0 / len) : Vec2{1.0, 0.0};
    const int m = static_cast<int>(std::floor(len / step_mm + 1e-9)) + 1;

    Profile prof;
    prof.position_mm.reserve(m);
    prof.value.reserve(m);
    for (int i = 0; i < m; ++i) {
        const double t = i * step_mm;
        const Vec2 p = p0_mm + dir * t;
        const double px = p.x / sx;
        const double py = p.y / sy;
        if (px < -1e-9 || py < -1e-9 || px > img.w - 1 + 1e-9 || py > img.h - 1 + 1e-9)
            throw Error("line_intensity_derivative: ray leaves the image domain");
        prof.position_mm.push_back(t);
        prof.value.push_back(img.sample(std::clamp(px, 0.0, img.w - 1.0),
                                        std::clamp(py, 0.0, img.h - 1.0)));
    }

    Profile deriv;
    deriv.position_mm = prof.position_mm;
    deriv.value.resize(m, 0.0);
    if (m >= 2) {
        deriv.value[0] = (prof.value[1] - prof.value[0]) / step_mm;
        deriv.value[m - 1] = (prof.value[m - 1] - prof.value[m - 2]) / step_mm;
        for (int i = 1; i + 1 < m; ++i)
            deriv.value[i] = (prof.value[i + 1] - prof.value[i - 1]) / (2.0 * step_mm);
    }
    return {std::move(prof), std::move(deriv)};
}

Mask2D keep_largest_components(const Mask2D& mask, int k) {
    if (k < 1) throw Error("keep_largest_components: k must be >= 1");
    const int h = mask.h, w = mask.w;
    std::vector<int> comp(static_cast<size_t>(h) * w, -1);
    std::vector<std::pair<int, int>> sizes;  // (size, component id)

    std::vector<int> stack;
    int next_id = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const size_t idx = static_cast<size_t>(y) * w + x;
            if (mask.v[idx] == 0 || comp[idx] >= 0) continue;
            int count = 0;
            stack.push_back(static_cast<int>(idx));
            comp[idx] = next_id;
            while (!stack.empty()) {
                const int cur = stack.back();
                stack.pop_back();
                ++count;
                const int cy = cur / w, cx = cur % w;
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        const int nx = cx + dx, ny = cy + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                        const size_t nidx = static_cast<size_t>(ny) * w + nx;
                        if (mask.v[nidx] != 0 && comp[nidx] < 0) {
                            comp[nidx] = next_id;
                            stack.push_back(static_cast<int>(nidx));
                        }
                    }
                }
            }
            sizes.emplace_back(count, next_id);
            ++next_id;
        }
    }
    if (next_id <= k) return mask;

    // stable: size descending, earlier component wins ties
    std::stable_sort(sizes.begin(), sizes.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<char> keep(next_id, 0);
    for (int i = 0; i < k; ++i) keep[sizes[i].second] = 1;

    Mask2D out = mask;
    for (size_t i = 0; i < out.v.size(); ++i)
        if (out.v[i] != 0 && !keep[comp[i]]) out.v[i] = 0;
    return out;
}

double fold_angle_180(double deg) {
    double a = std::fmod(deg, 180.0);
    if (a < 0) a += 180.0;
    if (a >= 180.0) a -= 180.0;
    return a;
}

double line_angle_deg(const Line2D& line) {
    const Vec2 d = line.direction();
    return fold_angle_180(std::atan2(d.y, d.x) * 180.0 / M_PI);
}

}  // namespace fetbio
