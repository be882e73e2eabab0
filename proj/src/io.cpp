#include "fetbio/io.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fetbio/imageops.hpp"

namespace fetbio {
namespace io {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{}) throw Error("bad number: '" + s + "'");
    return v;
}

long parse_long(const std::string& s) {
    long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{}) throw Error("bad integer: '" + s + "'");
    return v;
}

struct Header {
    int nx = 0, ny = 0, nz = 0;
    double sx = 0, sy = 0, sz = 0;
    std::string kind, dtype, data_file;
};

void write_header(std::ostream& os, const char* kind, int nx, int ny, int nz,
                  double sx, double sy, double sz, const char* dtype,
                  const std::string& data_file) {
    os << "format_version 1\n";
    os << "kind " << kind << "\n";
    os << "dims " << nx << " " << ny << " " << nz << "\n";
    os << "spacing_mm " << fmt_double(sx) << " " << fmt_double(sy) << " "
       << fmt_double(sz) << "\n";
    os << "dtype " << dtype << "\n";
    os << "byte_order little\n";
    os << "raster_order x_fastest_z_slowest\n";
    if (std::strcmp(kind, "labels") == 0)
        os << "legend 0=background 1=left_hemisphere 2=right_hemisphere 3=cerebellum\n";
    os << "data_file " << data_file << "\n";
}

Header read_header(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open header: " + path.string());
    Header h;
    bool version_ok = false;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key.empty() || key[0] == '#') continue;
        if (key == "format_version") {
            std::string v;
            ls >> v;
            version_ok = v == "1";
        } else if (key == "kind") {
            ls >> h.kind;
        } else if (key == "dims") {
            ls >> h.nx >> h.ny >> h.nz;
        } else if (key == "spacing_mm") {
            std::string a, b, c;
            ls >> a >> b >> c;
            h.sx = parse_double(a);
            h.sy = parse_double(b);
            h.sz = parse_double(c);
        } else if (key == "dtype") {
            ls >> h.dtype;
        } else if (key == "byte_order") {
            std::string v;
            ls >> v;
            if (v != "little") throw Error("unsupported byte order: " + v);
        } else if (key == "raster_order") {
            std::string v;
            ls >> v;
            if (v != "x_fastest_z_slowest")
                throw Error("unsupported raster order: " + v);
        } else if (key == "data_file") {
            ls >> h.data_file;
        }
    }
    if (!version_ok) throw Error("missing or unsupported format_version: " + path.string());
    if (h.nx <= 0 || h.ny <= 0 || h.nz <= 0)
        throw Error("bad dims in header: " + path.string());
    if (h.sx <= 0 || h.sy <= 0 || h.sz <= 0)
        throw Error("bad spacing in header: " + path.string());
    if (h.data_file.empty()) throw Error("missing data_file in header: " + path.string());
    return h;
}

std::vector<char> read_raw(const std::filesystem::path& path, size_t expected) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open raw data: " + path.string());
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
    if (bytes.size() != expected)
        throw Error("raw data size mismatch: " + path.string() + " has " +
                    std::to_string(bytes.size()) + " bytes, expected " +
                    std::to_string(expected));
    return bytes;
}

}  // namespace

void write_volume(const Volume& vol, const std::filesystem::path& header_path,
                  const std::string& data_filename, VolumeDtype dtype) {
    vol.validate();
    std::ofstream hdr(header_path);
    if (!hdr) throw Error("cannot write header: " + header_path.string());
    write_header(hdr, "volume", vol.nx, vol.ny, vol.nz, vol.sx, vol.sy, vol.sz,
                 dtype == VolumeDtype::F32 ? "f32" : "u16", data_filename);

    const auto data_path = header_path.parent_path() / data_filename;
    std::ofstream raw(data_path, std::ios::binary);
    if (!raw) throw Error("cannot write raw data: " + data_path.string());
    if (dtype == VolumeDtype::F32) {
        raw.write(reinterpret_cast<const char*>(vol.voxels.data()),
                  static_cast<std::streamsize>(vol.voxels.size() * sizeof(float)));
    } else {
        std::vector<uint16_t> buf(vol.voxels.size());
        for (size_t i = 0; i < buf.size(); ++i) {
            const float v = vol.voxels[i];
            buf[i] = static_cast<uint16_t>(
                std::min(65535.0f, std::max(0.0f, std::round(v))));
        }
        raw.write(reinterpret_cast<const char*>(buf.data()),
                  static_cast<std::streamsize>(buf.size() * sizeof(uint16_t)));
    }
}

Volume read_volume(const std::filesystem::path& header_path) {
    const Header h = read_header(header_path);
    if (h.kind != "volume") throw Error("not a volume header: " + header_path.string());
    Volume vol(h.nx, h.ny, h.nz, h.sx, h.sy, h.sz);
    const auto data_path = header_path.parent_path() / h.data_file;
    const size_t n = vol.voxels.size();
    if (h.dtype == "f32") {
        const auto bytes = read_raw(data_path, n * sizeof(float));
        std::memcpy(vol.voxels.data(), bytes.data(), bytes.size());
    } else if (h.dtype == "u16") {
        const auto bytes = read_raw(data_path, n * sizeof(uint16_t));
        std::vector<uint16_t> buf(n);
        std::memcpy(buf.data(), bytes.data(), bytes.size());
        for (size_t i = 0; i < n; ++i) vol.voxels[i] = buf[i];
    } else {
        throw Error("unsupported volume dtype: " + h.dtype);
    }
    return vol;
}

void write_labels(const LabelMap& labels, const std::filesystem::path& header_path,
                  const std::string& data_filename) {
    labels.validate();
    std::ofstream hdr(header_path);
    if (!hdr) throw Error("cannot write header: " + header_path.string());
    write_header(hdr, "labels", labels.nx, labels.ny, labels.nz, labels.sx,
                 labels.sy, labels.sz, "u8", data_filename);
    const auto data_path = header_path.parent_path() / data_filename;
    std::ofstream raw(data_path, std::ios::binary);
    if (!raw) throw Error("cannot write raw data: " + data_path.string());
    raw.write(reinterpret_cast<const char*>(labels.labels.data()),
              static_cast<std::streamsize>(labels.labels.size()));
}

LabelMap read_labels(const std::filesystem::path& header_path) {
    const Header h = read_header(header_path);
    if (h.kind != "labels") throw Error("not a labels header: " + header_path.string());
    if (h.dtype != "u8") throw Error("labels must be u8: " + header_path.string());
    LabelMap labels(h.nx, h.ny, h.nz, h.sx, h.sy, h.sz);
    const auto bytes = read_raw(header_path.parent_path() / h.data_file,
                                labels.labels.size());
    std::memcpy(labels.labels.data(), bytes.data(), bytes.size());
    labels.validate();
    return labels;
}

void write_probabilities(const SliceProbabilities& cbd_bbd,
                         const SliceProbabilities& tcd,
                         const std::filesystem::path& path) {
    ordered_json j;
    j["format_version"] = "1";
    j["cbd_bbd"] = cbd_bbd.p;
    j["tcd"] = tcd.p;
    std::ofstream out(path);
    if (!out) throw Error("cannot write probabilities: " + path.string());
    out << j.dump(2) << "\n";
}

std::pair<SliceProbabilities, SliceProbabilities> read_probabilities(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open probabilities: " + path.string());
    ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw Error("bad probabilities file " + path.string() + ": " + e.what());
    }
    if (j.value("format_version", "") != "1")
        throw Error("unsupported probabilities format_version: " + path.string());
    SliceProbabilities cbd, tcd;
    cbd.task = SliceTask::CBD_BBD;
    tcd.task = SliceTask::TCD;
    cbd.p = j.at("cbd_bbd").get<std::vector<double>>();
    tcd.p = j.at("tcd").get<std::vector<double>>();
    return {cbd, tcd};
}

namespace {

ordered_json endpoint_json(const Vec2& p, double sx, double sy) {
    ordered_json j;
    j["mm"] = {p.x, p.y};
    j["voxel"] = {p.x / sx, p.y / sy};
    return j;
}

ordered_json measurement_json(const std::optional<Measurement>& m,
                              double sx, double sy) {
    ordered_json j;
    j["present"] = m.has_value();
    if (!m) return j;
    j["slice"] = m->slice_index;
    j["value_mm"] = m->value_mm;
    j["endpoint_a"] = endpoint_json(m->endpoint_a, sx, sy);
    j["endpoint_b"] = endpoint_json(m->endpoint_b, sx, sy);
    if (m->fissure_t_mm) j["fissure_t_mm"] = *m->fissure_t_mm;
    if (m->hull_angle_deg) j["hull_angle_deg"] = *m->hull_angle_deg;
    if (m->rect_angle_deg) j["rect_long_axis_deg"] = *m->rect_angle_deg;
    if (!m->notes.empty()) j["notes"] = m->notes;
    return j;
}

}  // namespace

void write_report(const PipelineReport& report, const PipelineConfig& cfg,
                  const std::filesystem::path& path) {
    ordered_json j;
    j["format_version"] = "1";
    j["volume_id"] = report.volume_id;
    j["n_slices"] = report.n_slices;

    ordered_json inputs;
    inputs["volume"] = report.volume_path;
    inputs["labels"] = report.labels_path;
    inputs["probabilities"] = report.probs_path;
    j["inputs"] = inputs;

    ordered_json jc;
    jc["svm"] = {{"lambda", cfg.svm.lambda},
                 {"max_iter", cfg.svm.max_iter},
                 {"seed", cfg.svm.seed}};
    jc["reliability"] = {{"slice_prob_threshold", cfg.reliability.slice_prob_threshold},
                         {"orientation_samples", cfg.reliability.orientation_samples},
                         {"msl_adjacent_angle_deg", cfg.reliability.msl_adjacent_angle_deg},
                         {"bbd_clahe_diff_mm", cfg.reliability.bbd_clahe_diff_mm},
                         {"tcd_angle_deg", cfg.reliability.tcd_angle_deg},
                         {"clahe_tile", {cfg.reliability.clahe_tile_h, cfg.reliability.clahe_tile_w}},
                         {"clahe_clip", cfg.reliability.clahe_clip},
                         {"seed", cfg.reliability.seed}};
    jc["bbd_tau_rel"] = cfg.bbd_tau_rel;
    jc["cleanup_components"] = cfg.cleanup_components;
    jc["bin_mm"] = cfg.bin_mm;
    j["config"] = jc;

    ordered_json sel;
    sel["cbd_bbd"] = {{"index", report.cbd_slice}, {"probability", report.cbd_slice_prob}};
    sel["tcd"] = {{"index", report.tcd_slice}, {"probability", report.tcd_slice_prob}};
    j["selected_slices"] = sel;

    const double sx = report.spacing_x > 0 ? report.spacing_x : 1.0;
    const double sy = report.spacing_y > 0 ? report.spacing_y : 1.0;
    ordered_json meas;
    meas["cbd"] = measurement_json(report.cbd, sx, sy);
    meas["bbd"] = measurement_json(report.bbd, sx, sy);
    meas["tcd"] = measurement_json(report.tcd, sx, sy);
    j["measurements"] = meas;

    ordered_json msl = ordered_json::array();
    for (const SliceLine& s : report.msl) {
        ordered_json js;
        js["slice"] = s.slice;
        js["a"] = s.line.a;
        js["b"] = s.line.b;
        js["c"] = s.line.c;
        js["angle_deg"] = s.angle_deg;
        js["inferior_sign"] = s.inferior_sign;
        js["consistent"] = s.consistent;
        js["from_cerebellum"] = s.from_cerebellum;
        js["svm_converged"] = s.svm_converged;
        msl.push_back(js);
    }
    j["msl"] = msl;

    ordered_json warn = ordered_json::array();
    for (const ReliabilityWarning& w : report.warnings)
        warn.push_back({{"code", to_string(w.code)}, {"detail", w.detail}});
    j["warnings"] = warn;
    j["errors"] = report.errors;

    std::ofstream out(path);
    if (!out) throw Error("cannot write report: " + path.string());
    out << j.dump(2) << "\n";
}

EvalRecord read_report_record(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open report: " + path.string());
    ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw Error("bad report file " + path.string() + ": " + e.what());
    }
    if (j.value("format_version", "") != "1")
        throw Error("unsupported report format_version: " + path.string());
    EvalRecord rec;
    rec.volume_id = j.value("volume_id", "");
    rec.n_slices = j.value("n_slices", 0);
    rec.cbd_slice = j["selected_slices"]["cbd_bbd"]["index"].get<int>();
    rec.tcd_slice = j["selected_slices"]["tcd"]["index"].get<int>();
    auto meas = [&](const char* key) -> std::optional<double> {
        const auto& m = j["measurements"][key];
        if (!m.value("present", false)) return std::nullopt;
        return m["value_mm"].get<double>();
    };
    rec.cbd_mm = meas("cbd");
    rec.bbd_mm = meas("bbd");
    rec.tcd_mm = meas("tcd");
    return rec;
}

void write_reference_csv(const std::vector<ReferenceRow>& rows,
                         const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write reference csv: " + path.string());
    out << "volume_id,cbd_mm,bbd_mm,tcd_mm,cbd_slice,tcd_slice\n";
    for (const ReferenceRow& r : rows)
        out << r.volume_id << "," << fmt_double(r.cbd_mm) << ","
            << fmt_double(r.bbd_mm) << "," << fmt_double(r.tcd_mm) << ","
            << r.cbd_slice << "," << r.tcd_slice << "\n";
}

std::vector<ReferenceRow> read_reference_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open reference csv: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw Error("empty reference csv: " + path.string());
    if (line.size() && line.back() == '\r') line.pop_back();
    if (line != "volume_id,cbd_mm,bbd_mm,tcd_mm,cbd_slice,tcd_slice")
        throw Error("bad reference csv header: " + path.string());
    std::vector<ReferenceRow> rows;
    while (std::getline(in, line)) {
        if (line.size() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::istringstream ls(line);
        std::string f;
        while (std::getline(ls, f, ',')) fields.push_back(f);
        if (fields.size() != 6)
            throw Error("bad reference csv row: '" + line + "'");
        ReferenceRow r;
        r.volume_id = fields[0];
        r.cbd_mm = parse_double(fields[1]);
        r.bbd_mm = parse_double(fields[2]);
        r.tcd_mm = parse_double(fields[3]);
        r.cbd_slice = static_cast<int>(parse_long(fields[4]));
        r.tcd_slice = static_cast<int>(parse_long(fields[5]));
        rows.push_back(r);
    }
    return rows;
}

void write_eval_stats(const EvalStats& stats, const std::filesystem::path& path) {
    auto agreement = [](const AgreementStats& a) {
        return ordered_json{{"bias", a.bias},
                            {"ci95", a.ci95},
                            {"mean_abs_diff", a.mean_abs_diff},
                            {"n", a.n}};
    };
    auto slice = [](const SliceAgreement& s) {
        return ordered_json{{"accuracy_mean", s.accuracy_mean},
                            {"diff_mean", s.diff_mean},
                            {"diff_max", s.diff_max}};
    };
    ordered_json j;
    j["format_version"] = "1";
    j["std_convention"] = "population";
    j["n_volumes"] = stats.n_volumes;
    j["measurements"] = {{"cbd", agreement(stats.cbd)},
                         {"bbd", agreement(stats.bbd)},
                         {"tcd", agreement(stats.tcd)}};
    j["slice_selection"] = {{"cbd_bbd", slice(stats.cbd_slice)},
                            {"tcd", slice(stats.tcd_slice)}};
    std::ofstream out(path);
    if (!out) throw Error("cannot write eval stats: " + path.string());
    out << j.dump(2) << "\n";
}

}  // namespace io
}  // namespace fetbio
