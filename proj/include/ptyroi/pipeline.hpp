#pragma once

#include "ptyroi/clustering.hpp"
#include "ptyroi/dataset.hpp"
#include "ptyroi/stats.hpp"

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ptyroi {

/// Every field has a default, so a config file (flat key=value lines, `#`
/// comments) fully determines a run. CLI overrides win over the file.
struct PipelineConfig {
    // Input: set stack+positions to load; leave empty to simulate.
    std::string stack;
    std::string positions;

    // Simulation parameters.
    std::size_t phantom_px = 256;
    std::size_t probe_px = 16;
    std::size_t probe_diameter = 16;
    std::size_t grid_rows = 40;
    std::size_t grid_cols = 40;
    std::size_t step_px = 6;
    double alpha = 0.3;
    double phi = 0.5;
    double photons = 0.0;

    // Preprocessing + selection.
    bool filter = true;
    bool log_scale = true;
    int kmeans_iters = 10;
    int border = 0;
    std::optional<int> border_rows;  // anisotropic override
    std::optional<int> border_cols;

    // Optional validation reconstruction (full vs RoI + SSIM).
    bool recon = false;
    int recon_iters = 100;
    double recon_step = 1.0;

    std::uint64_t seed = 0;
    int threads = 0;
    bool png = false;
    std::string out_dir = "out";
};

PipelineConfig parse_config_file(const std::filesystem::path& path);
void apply_config_override(PipelineConfig& cfg, std::string_view key, std::string_view value);

struct StageTiming {
    std::string name;
    double seconds = 0.0;
};

struct TimingReport {
    std::vector<StageTiming> stages;  // input, stats, clustering, selection, filter, reconstruction
    double total_seconds = 0.0;
    std::size_t frames_in = 0;
    std::size_t frames_out = 0;

    std::size_t absorption_count = 0;
    std::size_t scatter_count = 0;
    std::size_t overlap_count = 0;
    std::size_t union_count = 0;
    std::size_t selected_count = 0;  // after border adjustment
    double fraction = 0.0;
    double ssim_score = std::numeric_limits<double>::quiet_NaN();
};

/// Runs simulate/load -> stats -> cluster -> select(+border) -> filter ->
/// optional reconstruct+SSIM, writing all artifacts into cfg.out_dir. On a
/// stage failure the partial outputs of this run are removed and the error is
/// rethrown with the stage name prefixed.
TimingReport run_pipeline(const PipelineConfig& cfg);

// CSV plumbing shared between the pipeline and the CLI subcommands.
void write_stat_csv(const StatMap& m, const std::vector<ScanPosition>& positions,
                    const std::filesystem::path& path);
std::pair<StatMap, std::vector<ScanPosition>> read_stat_csv(const std::filesystem::path& path,
                                                            MapKind kind);
void write_roi_mask_csv(const RoiMask& mask, const std::vector<ScanPosition>& positions,
                        const std::filesystem::path& path);
RoiMask read_roi_mask_csv(const std::filesystem::path& path);

struct RoiSummary {
    std::size_t occupied = 0;
    std::size_t absorption_count = 0;
    std::size_t scatter_count = 0;
    std::size_t overlap_count = 0;
    std::size_t union_count = 0;
    std::size_t selected_count = 0;
    int border = 0;
    double fraction = 0.0;
};

void write_roi_summary_json(const RoiSummary& s, const std::filesystem::path& path);
void write_timing_json(const TimingReport& r, const std::filesystem::path& path);

}  // namespace ptyroi
