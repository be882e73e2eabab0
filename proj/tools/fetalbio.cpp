#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fetbio/io.hpp"
#include "fetbio/phantom.hpp"
#include "fetbio/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitPipelineFailure = 2;

fetbio::PipelineConfig load_config(const std::string& path) {
    fetbio::PipelineConfig cfg;
    if (path.empty()) return cfg;
    std::ifstream in(path);
    if (!in) throw fetbio::Error("cannot open config: " + path);
    json j;
    in >> j;
    if (j.contains("svm")) {
        const auto& s = j["svm"];
        cfg.svm.lambda = s.value("lambda", cfg.svm.lambda);
        cfg.svm.max_iter = s.value("max_iter", cfg.svm.max_iter);
        cfg.svm.seed = s.value("seed", cfg.svm.seed);
    }
    if (j.contains("reliability")) {
        const auto& r = j["reliability"];
        auto& rc = cfg.reliability;
        rc.slice_prob_threshold = r.value("slice_prob_threshold", rc.slice_prob_threshold);
        rc.orientation_samples = r.value("orientation_samples", rc.orientation_samples);
        rc.msl_adjacent_angle_deg = r.value("msl_adjacent_angle_deg", rc.msl_adjacent_angle_deg);
        rc.bbd_clahe_diff_mm = r.value("bbd_clahe_diff_mm", rc.bbd_clahe_diff_mm);
        rc.tcd_angle_deg = r.value("tcd_angle_deg", rc.tcd_angle_deg);
        rc.clahe_clip = r.value("clahe_clip", rc.clahe_clip);
        rc.seed = r.value("seed", rc.seed);
        if (r.contains("clahe_tile")) {
            rc.clahe_tile_h = r["clahe_tile"][0].get<int>();
            rc.clahe_tile_w = r["clahe_tile"][1].get<int>();
        }
    }
    cfg.bbd_tau_rel = j.value("bbd_tau_rel", cfg.bbd_tau_rel);
    cfg.cleanup_components = j.value("cleanup_components", cfg.cleanup_components);
    cfg.bin_mm = j.value("bin_mm", cfg.bin_mm);
    return cfg;
}

fetbio::PhantomSpec load_phantom_spec(const std::string& path) {
    fetbio::PhantomSpec spec;
    if (path.empty()) return spec;
    std::ifstream in(path);
    if (!in) throw fetbio::Error("cannot open phantom spec: " + path);
    json j;
    in >> j;
    if (j.contains("dims")) {
        spec.nx = j["dims"][0].get<int>();
        spec.ny = j["dims"][1].get<int>();
        spec.nz = j["dims"][2].get<int>();
    }
    if (j.contains("spacing_mm")) {
        spec.sx = j["spacing_mm"][0].get<double>();
        spec.sy = j["spacing_mm"][1].get<double>();
        spec.sz = j["spacing_mm"][2].get<double>();
    }
    spec.msl_angle_deg = j.value("msl_angle_deg", spec.msl_angle_deg);
    spec.hemi_a_mm = j.value("hemi_a_mm", spec.hemi_a_mm);
    spec.hemi_b_mm = j.value("hemi_b_mm", spec.hemi_b_mm);
    spec.hemi_c_mm = j.value("hemi_c_mm", spec.hemi_c_mm);
    spec.inferior_elongation = j.value("inferior_elongation", spec.inferior_elongation);
    spec.gap_mm = j.value("gap_mm", spec.gap_mm);
    spec.fissure_offset_mm = j.value("fissure_offset_mm", spec.fissure_offset_mm);
    spec.fissure_depth_mm = j.value("fissure_depth_mm", spec.fissure_depth_mm);
    spec.fissure_width_mm = j.value("fissure_width_mm", spec.fissure_width_mm);
    spec.csf_gap_mm = j.value("csf_gap_mm", spec.csf_gap_mm);
    spec.skull_thickness_mm = j.value("skull_thickness_mm", spec.skull_thickness_mm);
    spec.cereb_offset_mm = j.value("cereb_offset_mm", spec.cereb_offset_mm);
    spec.cereb_along_mm = j.value("cereb_along_mm", spec.cereb_along_mm);
    spec.cereb_perp_mm = j.value("cereb_perp_mm", spec.cereb_perp_mm);
    spec.cereb_z_mm = j.value("cereb_z_mm", spec.cereb_z_mm);
    spec.cereb_slice_offset = j.value("cereb_slice_offset", spec.cereb_slice_offset);
    spec.noise_sigma = j.value("noise_sigma", spec.noise_sigma);
    spec.seed = j.value("seed", spec.seed);
    return spec;
}

int run_measure(const std::string& volume_path, const std::string& labels_path,
                const std::string& probs_path, const std::string& out_path,
                const std::string& config_path) {
    fetbio::PipelineConfig cfg;
    fetbio::Volume vol;
    fetbio::LabelMap labels;
    fetbio::SliceProbabilities probs_cbd, probs_tcd;
    try {
        cfg = load_config(config_path);
        vol = fetbio::io::read_volume(volume_path);
        labels = fetbio::io::read_labels(labels_path);
        std::tie(probs_cbd, probs_tcd) = fetbio::io::read_probabilities(probs_path);
    } catch (const std::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInputError;
    }

    try {
        fetbio::PipelineReport report =
            fetbio::run_pipeline(vol, labels, probs_cbd, probs_tcd, cfg);
        report.volume_id = fs::path(volume_path).stem().string();
        report.volume_path = volume_path;
        report.labels_path = labels_path;
        report.probs_path = probs_path;
        fetbio::io::write_report(report, cfg, out_path);
        for (const auto& w : report.warnings)
            std::cerr << "warning [" << fetbio::to_string(w.code) << "] "
                      << w.detail << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "pipeline failure: " << e.what() << "\n";
        return kExitPipelineFailure;
    }
}

int run_phantom(const std::string& spec_path, uint64_t seed, bool seed_set,
                const std::string& out_dir) {
    try {
        fetbio::PhantomSpec spec = load_phantom_spec(spec_path);
        if (seed_set) spec.seed = seed;
        const fetbio::PhantomResult res = fetbio::generate(spec);

        fs::create_directories(out_dir);
        const fs::path dir(out_dir);
        fetbio::io::write_volume(res.volume, dir / "volume.fvh", "volume.raw");
        fetbio::io::write_labels(res.labels, dir / "labels.fvh", "labels.raw");
        fetbio::io::write_probabilities(res.probs_cbd, res.probs_tcd,
                                        dir / "probs.json");

        json truth;
        truth["format_version"] = "1";
        truth["cbd_mm"] = res.truth.cbd_mm;
        truth["bbd_mm"] = res.truth.bbd_mm;
        truth["tcd_mm"] = res.truth.tcd_mm;
        truth["cbd_slice"] = res.truth.cbd_slice;
        truth["tcd_slice"] = res.truth.tcd_slice;
        truth["msl"] = {res.truth.msl.a, res.truth.msl.b, res.truth.msl.c};
        truth["inferior_direction"] = {res.truth.inferior_direction.x,
                                       res.truth.inferior_direction.y};
        std::ofstream t(dir / "truth.json");
        t << truth.dump(2) << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "phantom error: " << e.what() << "\n";
        return kExitInputError;
    }
}

int run_evaluate(const std::string& pred_dir, const std::string& ref_csv,
                 const std::string& out_path) {
    std::vector<fetbio::EvalRecord> records;
    std::vector<fetbio::ReferenceRow> reference;
    try {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(pred_dir))
            if (e.is_regular_file() && e.path().extension() == ".json" &&
                e.path().filename() != "probs.json" &&
                e.path().filename() != "truth.json")
                files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files)
            records.push_back(fetbio::io::read_report_record(f));
        if (records.empty())
            throw fetbio::Error("no report files found in " + pred_dir);
        reference = fetbio::io::read_reference_csv(ref_csv);
    } catch (const std::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInputError;
    }
    try {
        const fetbio::EvalStats stats = fetbio::run_eval(records, reference);
        fetbio::io::write_eval_stats(stats, out_path);
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "eval failure: " << e.what() << "\n";
        return kExitPipelineFailure;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fetal brain linear measurements (CBD/BBD/TCD) pipeline"};
    app.require_subcommand(1);

    std::string volume_path, labels_path, probs_path, out_path, config_path;
    auto* measure = app.add_subcommand("measure", "run the measurement pipeline");
    measure->add_option("--volume", volume_path, "volume header file")->required();
    measure->add_option("--labels", labels_path, "label map header file")->required();
    measure->add_option("--probs", probs_path, "slice probabilities file")->required();
    measure->add_option("--out", out_path, "report output path")->required();
    measure->add_option("--config", config_path, "pipeline config JSON");

    std::string spec_path, out_dir;
    uint64_t seed = 0;
    auto* phantom = app.add_subcommand("phantom", "generate a synthetic phantom");
    phantom->add_option("--spec", spec_path, "phantom spec JSON");
    auto* seed_opt = phantom->add_option("--seed", seed, "seed override");
    phantom->add_option("--out-dir", out_dir, "output directory")->required();

    std::string pred_dir, ref_csv, stats_path;
    auto* eval = app.add_subcommand("eval", "evaluate reports against a reference table");
    eval->add_option("--pred", pred_dir, "directory of report files")->required();
    eval->add_option("--ref", ref_csv, "reference CSV")->required();
    eval->add_option("--out", stats_path, "stats output path")->required();

    CLI11_PARSE(app, argc, argv);

    if (measure->parsed())
        return run_measure(volume_path, labels_path, probs_path, out_path, config_path);
    if (phantom->parsed())
        return run_phantom(spec_path, seed, seed_opt->count() > 0, out_dir);
    if (eval->parsed())
        return run_evaluate(pred_dir, ref_csv, stats_path);
    return kExitInputError;
}
