#include "fetbio/phantom.hpp"

#include <algorithm>
#include <cmath>

#include "fetbio/rng.hpp"

namespace fetbio {

double PhantomSpec::centroid_offset_mm() const {
    const double a_inf = hemi_a_mm * inferior_elongation;
    return 4.0 / (3.0 * M_PI) * (a_inf - hemi_a_mm);
}

void PhantomSpec::validate() const {
    if (nx <= 0 || ny <= 0 || nz <= 0 || sx <= 0 || sy <= 0 || sz <= 0)
        throw Error("PhantomSpec: dims and spacing must be positive");
    if (hemi_a_mm <= 0 || hemi_b_mm <= 0 || hemi_c_mm <= 0 ||
        inferior_elongation < 1.0)
        throw Error("PhantomSpec: bad hemisphere shape");
    if (fissure_offset_mm <= 0)
        throw Error("PhantomSpec: fissure_offset must be > 0");
    if (fissure_offset_mm >= centroid_offset_mm())
        throw Error("PhantomSpec: fissure must be superior to the mass center");
    if (fissure_depth_mm <= 0 || fissure_depth_mm >= hemi_b_mm / 2 ||
        fissure_width_mm <= 0)
        throw Error("PhantomSpec: bad fissure shape");
    if (csf_gap_mm <= 0 || skull_thickness_mm <= 0 || gap_mm <= 0)
        throw Error("PhantomSpec: shells and gap must be positive");

    const double a_inf = hemi_a_mm * inferior_elongation;
    const double shell = csf_gap_mm + skull_thickness_mm;
    const double reach = std::max(a_inf, std::max(hemi_a_mm, hemi_b_mm)) + shell;
    const double half_x = 0.5 * (nx - 1) * sx;
    const double half_y = 0.5 * (ny - 1) * sy;
    if (reach + std::max(sx, sy) > std::min(half_x, half_y))
        throw Error("PhantomSpec: head does not fit inside the volume");

    if (cereb_offset_mm <= centroid_offset_mm())
        throw Error("PhantomSpec: cerebellum must be strictly inferior to the hemisphere centroid");
    if (cereb_offset_mm + cereb_along_mm >= a_inf + csf_gap_mm ||
        cereb_perp_mm >= hemi_b_mm + csf_gap_mm)
        throw Error("PhantomSpec: cerebellum must stay inside the skull");
    if (cereb_slice_offset * sz + cereb_z_mm >= hemi_c_mm + csf_gap_mm)
        throw Error("PhantomSpec: cerebellum must stay inside the skull through-slice");

    const int k0 = nz / 2;
    const int kt = k0 + cereb_slice_offset;
    const double z_reach = std::max(hemi_c_mm, cereb_slice_offset * sz + cereb_z_mm) + shell;
    if (kt < 0 || kt >= nz || k0 * sz - z_reach < -sz || k0 * sz + z_reach > (nz - 1) * sz + sz)
        throw Error("PhantomSpec: reference slices or head extent outside the stack");
}

namespace {

struct Egg {
    double b;      // lateral semi-width
    double a_sup;  // superior semi-height (y_local < 0)
    double a_inf;  // inferior semi-height (y_local > 0)
    double c;      // through-slice semi-extent

    // normalized squared radius of the in-plane point at slice scale factor s
    double r2(double xl, double yl, double s) const {
        const double ax = (yl > 0 ? a_inf : a_sup) * s;
        const double bx = b * s;
        const double u = xl / bx, v = yl / ax;
        return u * u + v * v;
    }

    // in-plane half-width at height yl (s = slice scale factor); <= 0 outside
    double half_width(double yl, double s) const {
        const double ax = (yl > 0 ? a_inf : a_sup) * s;
        const double t = 1.0 - (yl / ax) * (yl / ax);
        return t <= 0 ? 0.0 : b * s * std::sqrt(t);
    }
};

}  // namespace

PhantomResult generate(const PhantomSpec& spec) {
    spec.validate();

    PhantomResult out;
    out.volume = Volume(spec.nx, spec.ny, spec.nz, spec.sx, spec.sy, spec.sz);
    out.labels = LabelMap(spec.nx, spec.ny, spec.nz, spec.sx, spec.sy, spec.sz);

    const double cx = 0.5 * (spec.nx - 1) * spec.sx;
    const double cy = 0.5 * (spec.ny - 1) * spec.sy;
    const int k0 = spec.nz / 2;
    const double cz = k0 * spec.sz;
    const int kt = k0 + spec.cereb_slice_offset;
    const double cereb_cz = kt * spec.sz;

    const double theta = spec.msl_angle_deg * M_PI / 180.0;
    const double ct = std::cos(theta), st = std::sin(theta);

    const double a_inf = spec.hemi_a_mm * spec.inferior_elongation;
    const Egg brain{spec.hemi_b_mm, spec.hemi_a_mm, a_inf, spec.hemi_c_mm};
    const Egg csf{spec.hemi_b_mm + spec.csf_gap_mm,
                  spec.hemi_a_mm + spec.csf_gap_mm,
                  a_inf + spec.csf_gap_mm,
                  spec.hemi_c_mm + spec.csf_gap_mm};
    const double shell = spec.csf_gap_mm + spec.skull_thickness_mm;
    const Egg skull{spec.hemi_b_mm + shell, spec.hemi_a_mm + shell,
                    a_inf + shell, spec.hemi_c_mm + shell};

    const double fiss_lo = spec.fissure_offset_mm - 0.5 * spec.fissure_width_mm;
    const double fiss_hi = spec.fissure_offset_mm + 0.5 * spec.fissure_width_mm;

    for (int z = 0; z < spec.nz; ++z) {
        const double zm = z * spec.sz;

        const double dzb = (zm - cz) / brain.c;
        const double brain_s2 = 1.0 - dzb * dzb;
        const double dzc = (zm - cz) / csf.c;
        const double csf_s2 = 1.0 - dzc * dzc;
        const double dzs = (zm - cz) / skull.c;
        const double skull_s2 = 1.0 - dzs * dzs;
        const double dzcb = (zm - cereb_cz) / spec.cereb_z_mm;
        const double cereb_s2 = 1.0 - dzcb * dzcb;

        for (int y = 0; y < spec.ny; ++y) {
            for (int x = 0; x < spec.nx; ++x) {
                const double dx = x * spec.sx - cx;
                const double dy = y * spec.sy - cy;
                // head-local frame: xl lateral, yl along the MSL (inferior +)
                const double xl = ct * dx + st * dy;
                const double yl = -st * dx + ct * dy;

                double intensity = spec.intens_background;
                uint8_t label = LabelMap::kBackground;

                if (cereb_s2 > 0.0) {
                    const double s = std::sqrt(cereb_s2);
                    const double u = xl / (spec.cereb_perp_mm * s);
                    const double v = (yl - spec.cereb_offset_mm) / (spec.cereb_along_mm * s);
                    if (u * u + v * v < 1.0) {
                        out.labels.at(x, y, z) = LabelMap::kCerebellum;
                        out.volume.at(x, y, z) = static_cast<float>(spec.intens_cerebellum);
                        continue;
                    }
                }

                if (brain_s2 > 0.0) {
                    const double s = std::sqrt(brain_s2);
                    if (brain.r2(xl, yl, s) < 1.0) {
                        const bool in_gap = std::abs(xl) < 0.5 * spec.gap_mm;
                        const bool in_fissure =
                            yl >= fiss_lo && yl <= fiss_hi &&
                            std::abs(xl) > brain.half_width(yl, s) - spec.fissure_depth_mm;
                        if (in_gap || in_fissure) {
                            intensity = spec.intens_csf;  // CSF-filled clefts
                        } else {
                            label = xl < 0 ? LabelMap::kLeft : LabelMap::kRight;
                            intensity = spec.intens_parenchyma;
                        }
                        out.labels.at(x, y, z) = label;
                        out.volume.at(x, y, z) = static_cast<float>(intensity);
                        continue;
                    }
                }

                if (csf_s2 > 0.0 && csf.r2(xl, yl, std::sqrt(csf_s2)) < 1.0)
                    intensity = spec.intens_csf;
                else if (skull_s2 > 0.0 && skull.r2(xl, yl, std::sqrt(skull_s2)) < 1.0)
                    intensity = spec.intens_skull;

                out.volume.at(x, y, z) = static_cast<float>(intensity);
            }
        }
    }

    if (spec.noise_sigma > 0.0) {
        Rng rng(spec.seed);
        for (float& v : out.volume.voxels) {
            const double n = v + spec.noise_sigma * rng.next_normal();
            v = static_cast<float>(std::clamp(n, 0.0, 1.0));
        }
    }

    out.truth.cbd_mm = 2.0 * spec.hemi_b_mm;
    out.truth.bbd_mm = 2.0 * (spec.hemi_b_mm + spec.csf_gap_mm);
    out.truth.tcd_mm = 2.0 * std::max(spec.cereb_perp_mm, spec.cereb_along_mm);
    out.truth.cbd_slice = k0;
    out.truth.tcd_slice = kt;
    // xl = 0 in volume coordinates: cos(t)(x - cx) + sin(t)(y - cy) = 0
    out.truth.msl = Line2D::normalized(ct, st, -(ct * cx + st * cy));
    out.truth.inferior_direction = {-st, ct};
    out.truth.center_mm = {cx, cy};

    out.probs_cbd.task = SliceTask::CBD_BBD;
    out.probs_cbd.p = PhantomProbabilitySource::clean_profile(spec.nz, k0);
    out.probs_tcd.task = SliceTask::TCD;
    out.probs_tcd.p = PhantomProbabilitySource::clean_profile(spec.nz, kt);
    return out;
}

}  // namespace fetbio
