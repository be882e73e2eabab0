#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "fetbio/core.hpp"
#include "fetbio/pipeline.hpp"
#include "fetbio/slice_select.hpp"

// External file formats (format_version "1" throughout):
//  - Volume / LabelMap: a structured text header (key value per line: dims,
//    spacing_mm, dtype u16|f32|u8, byte_order little, raster_order
//    x_fastest_z_slowest, data_file <relative path>) plus a raw binary file.
//    LabelMap headers carry the class legend.
//  - Probabilities sidecar: JSON with the "cbd_bbd" and "tcd" arrays.
//  - Report: JSON with measurements (mm and voxel endpoint coordinates),
//    per-slice MSL coefficients, warnings, errors and a config echo.
//  - Reference table: CSV with header
//    volume_id,cbd_mm,bbd_mm,tcd_mm,cbd_slice,tcd_slice.

namespace fetbio {
namespace io {

enum class VolumeDtype { U16, F32 };

void write_volume(const Volume& vol, const std::filesystem::path& header_path,
                  const std::string& data_filename, VolumeDtype dtype = VolumeDtype::F32);
Volume read_volume(const std::filesystem::path& header_path);

void write_labels(const LabelMap& labels, const std::filesystem::path& header_path,
                  const std::string& data_filename);
LabelMap read_labels(const std::filesystem::path& header_path);

void write_probabilities(const SliceProbabilities& cbd_bbd,
                         const SliceProbabilities& tcd,
                         const std::filesystem::path& path);
std::pair<SliceProbabilities, SliceProbabilities> read_probabilities(
    const std::filesystem::path& path);

void write_report(const PipelineReport& report, const PipelineConfig& cfg,
                  const std::filesystem::path& path);
/// Reads back the fields needed by the eval command.
EvalRecord read_report_record(const std::filesystem::path& path);

void write_reference_csv(const std::vector<ReferenceRow>& rows,
                         const std::filesystem::path& path);
std::vector<ReferenceRow> read_reference_csv(const std::filesystem::path& path);

void write_eval_stats(const EvalStats& stats, const std::filesystem::path& path);

}  // namespace io
}  // namespace fetbio
