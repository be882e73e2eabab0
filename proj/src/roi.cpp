#include "fetbio/roi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fetbio {

RoiBox tight_bbox(const LabelMap& labels, const std::set<uint8_t>& classes) {
    RoiBox box;
    box.x0 = labels.nx;
    box.y0 = labels.ny;
    box.z0 = labels.nz;
    box.x1 = box.y1 = box.z1 = -1;
    for (int z = 0; z < labels.nz; ++z) {
        for (int y = 0; y < labels.ny; ++y) {
            for (int x = 0; x < labels.nx; ++x) {
                if (!classes.count(labels.at(x, y, z))) continue;
                box.x0 = std::min(box.x0, x);
                box.y0 = std::min(box.y0, y);
                box.z0 = std::min(box.z0, z);
                box.x1 = std::max(box.x1, x);
                box.y1 = std::max(box.y1, y);
                box.z1 = std::max(box.z1, z);
            }
        }
    }
    if (box.x1 < box.x0) throw Error("tight_bbox: no foreground");
    return box;
}

namespace {

// round half up
int iround(double v) { return static_cast<int>(std::floor(v + 0.5)); }

// window [start, start+size) of the requested size centered on c, shifted
// inward at borders; degenerates to the full extent when size > extent
void place_window(double c, int size, int extent, int& start, int& out_size) {
    if (size >= extent) {
        start = 0;
        out_size = extent;
        return;
    }
    start = iround(c - (size - 1) / 2.0);
    start = std::clamp(start, 0, extent - size);
    out_size = size;
}

}  // namespace

PreparedStack prepare_slices(const Volume& vol, const RoiBox& roi,
                             double factor, int out) {
    if (out <= 0) throw Error("prepare_slices: out must be positive");
    if (roi.x0 < 0 || roi.y0 < 0 || roi.z0 < 0 ||
        roi.x1 >= vol.nx || roi.y1 >= vol.ny || roi.z1 >= vol.nz)
        throw Error("prepare_slices: roi outside volume");

    const int s = iround(factor * std::max(roi.height(), roi.width()));
    const double cx = 0.5 * (roi.x0 + roi.x1);
    const double cy = 0.5 * (roi.y0 + roi.y1);

    PreparedStack stack;
    stack.out = out;
    place_window(cx, s, vol.nx, stack.x0, stack.win_w);
    place_window(cy, s, vol.ny, stack.y0, stack.win_h);

    double mn = std::numeric_limits<double>::infinity();
    double mx = -mn;
    stack.slices.reserve(vol.nz);
    for (int z = 0; z < vol.nz; ++z) {
        Image2D crop(stack.win_h, stack.win_w);
        for (int y = 0; y < stack.win_h; ++y)
            for (int x = 0; x < stack.win_w; ++x)
                crop.at(x, y) = vol.at(stack.x0 + x, stack.y0 + y, z);
        Image2D resized = bilinear_resize(crop, out, out);
        for (double v : resized.v) {
            mn = std::min(mn, v);
            mx = std::max(mx, v);
        }
        stack.slices.push_back(std::move(resized));
    }

    const double inv = mx > mn ? 1.0 / (mx - mn) : 0.0;
    for (Image2D& img : stack.slices)
        for (double& v : img.v) v = (v - mn) * inv;
    return stack;
}

}  // namespace fetbio
