#include "ptyroi/clustering.hpp"
#include "ptyroi/dataset.hpp"
#include "ptyroi/errors.hpp"
#include "ptyroi/kernels.hpp"
#include "ptyroi/pipeline.hpp"
#include "ptyroi/png.hpp"
#include "ptyroi/recon.hpp"
#include "ptyroi/simulator.hpp"
#include "ptyroi/stats.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

namespace fs = std::filesystem;
using namespace ptyroi;

namespace {

struct CommonArgs {
    std::string out = ".";
    std::uint64_t seed = 0;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--out", args.out, "Output directory");
    cmd->add_option("--seed", args.seed, "Root random seed");
    cmd->add_option("--threads", args.threads, "Worker thread cap (0 = all cores)");
}

int run_simulate(const CommonArgs& common, const PipelineConfig& sim) {
    fs::create_directories(common.out);
    const Phantom phantom = shepp_logan(sim.phantom_px, sim.alpha, sim.phi);
    const Probe probe = circular_probe(sim.probe_px, sim.probe_diameter);
    SimulateOptions opt;
    opt.geometry = {sim.grid_rows, sim.grid_cols, sim.step_px};
    opt.photons = sim.photons;
    opt.seed = common.seed;
    opt.threads = common.threads;
    const ScanDataset ds = simulate_scan(phantom, probe, opt);
    save_dataset(ds, fs::path(common.out) / "dataset.ptys",
                 fs::path(common.out) / "positions.csv");
    std::cout << "wrote " << ds.num_frames() << " frames (" << ds.frame_rows << "x"
              << ds.frame_cols << ") to " << common.out << "\n";
    return 0;
}

int run_stats(const CommonArgs& common, const std::string& stack,
              const std::string& positions, bool no_log, bool png) {
    fs::create_directories(common.out);
    const ScanDataset ds = load_dataset(stack, positions, common.threads);
    const ScanStatistics st = compute_scan_statistics(ds, common.threads);
    StatMap absorption = mean_filter_3x3(st.absorption);
    StatMap com_mag = mean_filter_3x3(st.com_mag);
    if (!no_log) {
        absorption = log_transform(absorption, default_log_epsilon(absorption));
        com_mag = log_transform(com_mag, default_log_epsilon(com_mag));
    }
    write_stat_csv(absorption, ds.positions, fs::path(common.out) / "absorption.csv");
    write_stat_csv(com_mag, ds.positions, fs::path(common.out) / "com_magnitude.csv");
    if (png) {
        write_png_gray(to_gray(absorption.values, &absorption.occupied),
                       fs::path(common.out) / "absorption.png");
        write_png_gray(to_gray(com_mag.values, &com_mag.occupied),
                       fs::path(common.out) / "com_magnitude.png");
    }
    std::cout << "stats for " << ds.num_frames() << " frames written to " << common.out
              << "\n";
    return 0;
}

int run_select(const CommonArgs& common, const std::string& absorption_csv,
               const std::string& com_csv, int border, std::optional<int> border_rows,
               std::optional<int> border_cols, int kmeans_iters, bool png) {
    fs::create_directories(common.out);
    auto [absorption, positions] = read_stat_csv(absorption_csv, MapKind::absorption);
    auto [com_mag, positions2] = read_stat_csv(com_csv, MapKind::com_magnitude);

    const RoiMask mask_a = select_absorption_roi(absorption, kmeans_iters);
    const RoiMask mask_s = select_scatter_roi(com_mag, kmeans_iters);
    const RoiMask joined = union_roi(mask_a, mask_s);
    RoiMask selected = joined;
    if (border_rows || border_cols)
        selected = adjust_border_xy(joined, border_rows.value_or(0), border_cols.value_or(0));
    else if (border != 0)
        selected = adjust_border(joined, border);

    RoiSummary summary;
    summary.occupied = joined.count_occupied();
    summary.absorption_count = mask_a.count_true();
    summary.scatter_count = mask_s.count_true();
    summary.union_count = joined.count_true();
    summary.overlap_count =
        summary.absorption_count + summary.scatter_count - summary.union_count;
    summary.border = border;
    summary.selected_count = selected.count_true();
    summary.fraction = roi_fraction(selected);

    write_roi_mask_csv(selected, positions, fs::path(common.out) / "roi_mask.csv");
    write_roi_summary_json(summary, fs::path(common.out) / "roi_summary.json");
    if (png) {
        Grid<double> img(selected.cells.rows(), selected.cells.cols(), 0.0);
        for (std::size_t i = 0; i < img.size(); ++i)
            img.flat()[i] = selected.cells.flat()[i] ? 1.0 : 0.0;
        write_png_gray(to_gray(img), fs::path(common.out) / "roi_mask.png");
    }
    std::cout << "selected " << summary.selected_count << "/" << summary.occupied
              << " frames (absorption " << summary.absorption_count << ", scatter "
              << summary.scatter_count << ", overlap " << summary.overlap_count << ")\n";
    return 0;
}

int run_filter(const CommonArgs& common, const std::string& stack,
               const std::string& positions, const std::string& mask_csv) {
    fs::create_directories(common.out);
    const ScanDataset ds = load_dataset(stack, positions, common.threads);
    const RoiMask mask = read_roi_mask_csv(mask_csv);
    const ScanDataset filtered = filter_dataset(ds, mask);
    save_retained_indices(retained_indices(ds, mask), fs::path(common.out) / "retained.csv");
    save_dataset(filtered, fs::path(common.out) / "filtered.ptys",
                 fs::path(common.out) / "filtered_positions.csv");
    std::cout << "retained " << filtered.num_frames() << " of " << ds.num_frames()
              << " frames\n";
    return 0;
}

int run_reconstruct(const CommonArgs& common, const std::string& stack,
                    const std::string& positions, std::size_t probe_diameter,
                    int iterations, double object_step, bool png) {
    fs::create_directories(common.out);
    const ScanDataset ds = load_dataset(stack, positions, common.threads);
    const Probe probe = circular_probe(ds.frame_rows, probe_diameter);
    EpieOptions opt;
    opt.iterations = iterations;
    opt.object_step = object_step;
    opt.seed = common.seed;
    const ReconImage rec = epie_reconstruct(ds, probe, opt);
    save_grid_f32(modulus_image(rec), fs::path(common.out) / "recon_modulus.ptys");
    save_grid_f32(phase_image(rec), fs::path(common.out) / "recon_phase.ptys");
    if (png) {
        write_png_gray(to_gray(modulus_image(rec)), fs::path(common.out) / "recon_modulus.png");
        write_png_gray(to_gray(phase_image(rec)), fs::path(common.out) / "recon_phase.png");
    }
    std::printf("final misfit %.6e after %d iterations\n", rec.error_trace.back(),
                rec.iterations);
    return 0;
}

int run_ssim(const std::string& a_path, const std::string& b_path) {
    const Grid<double> a = load_grid_f32(a_path);
    const Grid<double> b = load_grid_f32(b_path);
    std::printf("%.6f\n", ssim(a, b));
    return 0;
}

int run_pipeline_cmd(PipelineConfig cfg) {
    const TimingReport report = run_pipeline(cfg);
    std::cout << "frames in " << report.frames_in << ", out " << report.frames_out
              << "; RoI fraction " << report.fraction << "\n";
    for (const auto& s : report.stages)
        std::printf("  %-15s %8.3f s\n", s.name.c_str(), s.seconds);
    std::printf("  %-15s %8.3f s\n", "total", report.total_seconds);
    if (!std::isnan(report.ssim_score))
        std::printf("ssim(full, roi) = %.6f\n", report.ssim_score);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RoI triage for ptychographic scans: cluster absorption and "
                 "CoM-scatter statistics, filter the dataset, validate by "
                 "reconstruction"};
    app.require_subcommand(1);

    CommonArgs common;

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "Generate a phantom scan dataset");
    PipelineConfig sim_cfg;
    add_common(sim_cmd, common);
    sim_cmd->add_option("--phantom-px", sim_cfg.phantom_px, "Phantom size in pixels");
    sim_cmd->add_option("--probe-px", sim_cfg.probe_px, "Probe/frame size in pixels");
    sim_cmd->add_option("--probe-diameter", sim_cfg.probe_diameter, "Probe disk diameter");
    sim_cmd->add_option("--grid-rows", sim_cfg.grid_rows, "Scan grid rows");
    sim_cmd->add_option("--grid-cols", sim_cfg.grid_cols, "Scan grid columns");
    sim_cmd->add_option("--step-px", sim_cfg.step_px, "Scan step in pixels");
    sim_cmd->add_option("--alpha", sim_cfg.alpha, "Absorption strength in [0,1]");
    sim_cmd->add_option("--phi", sim_cfg.phi, "Phase strength in radians");
    sim_cmd->add_option("--photons", sim_cfg.photons,
                        "Free-space photons per frame (0 = noiseless)");

    // stats
    auto* stats_cmd = app.add_subcommand("stats", "Compute absorption and CoM stat maps");
    std::string stack, positions;
    bool no_log = false, png = false;
    add_common(stats_cmd, common);
    stats_cmd->add_option("--stack", stack, "Input stack file")->required();
    stats_cmd->add_option("--positions", positions, "Input positions CSV")->required();
    stats_cmd->add_flag("--no-log", no_log, "Write raw filtered values (skip log scale)");
    stats_cmd->add_flag("--png", png, "Also render grayscale PNG maps");

    // select
    auto* select_cmd = app.add_subcommand("select", "Cluster stat maps into an RoI mask");
    std::string absorption_csv, com_csv;
    int border = 0, kmeans_iters = 10;
    std::optional<int> border_rows, border_cols;
    add_common(select_cmd, common);
    select_cmd->add_option("--absorption", absorption_csv, "absorption.csv path")->required();
    select_cmd->add_option("--com-magnitude", com_csv, "com_magnitude.csv path")->required();
    select_cmd->add_option("--border", border, "Signed Chebyshev border radius");
    select_cmd->add_option("--border-rows", border_rows, "Anisotropic row radius");
    select_cmd->add_option("--border-cols", border_cols, "Anisotropic column radius");
    select_cmd->add_option("--kmeans-iters", kmeans_iters, "k-means iteration cap");
    select_cmd->add_flag("--png", png, "Also render the mask as PNG");

    // filter
    auto* filter_cmd = app.add_subcommand("filter", "Keep only RoI frames");
    std::string mask_csv;
    add_common(filter_cmd, common);
    filter_cmd->add_option("--stack", stack, "Input stack file")->required();
    filter_cmd->add_option("--positions", positions, "Input positions CSV")->required();
    filter_cmd->add_option("--mask", mask_csv, "roi_mask.csv path")->required();

    // reconstruct
    auto* recon_cmd = app.add_subcommand("reconstruct", "ePIE object reconstruction");
    std::size_t probe_diameter = 16;
    int iterations = 100;
    double object_step = 1.0;
    add_common(recon_cmd, common);
    recon_cmd->add_option("--stack", stack, "Input stack file")->required();
    recon_cmd->add_option("--positions", positions, "Input positions CSV")->required();
    recon_cmd->add_option("--probe-diameter", probe_diameter, "Probe disk diameter")
        ->required();
    recon_cmd->add_option("--iterations", iterations, "ePIE iterations");
    recon_cmd->add_option("--object-step", object_step, "ePIE object update step");
    recon_cmd->add_flag("--png", png, "Also render modulus/phase PNGs");

    // ssim
    auto* ssim_cmd = app.add_subcommand("ssim", "SSIM between two grid files");
    std::string grid_a, grid_b;
    ssim_cmd->add_option("a", grid_a, "First grid file")->required();
    ssim_cmd->add_option("b", grid_b, "Second grid file")->required();

    // pipeline
    auto* pipe_cmd = app.add_subcommand("pipeline", "Run the full triage pipeline");
    std::string config_path;
    std::vector<std::string> overrides;
    bool pipe_no_log = false;
    std::optional<std::string> pipe_out;
    std::optional<std::uint64_t> pipe_seed;
    std::optional<int> pipe_threads, pipe_border, pipe_kmeans;
    pipe_cmd->add_option("--config", config_path, "key=value config file");
    pipe_cmd->add_option("--out", pipe_out, "Output directory");
    pipe_cmd->add_option("--seed", pipe_seed, "Root random seed");
    pipe_cmd->add_option("--threads", pipe_threads, "Worker thread cap");
    pipe_cmd->add_option("--border", pipe_border, "Signed Chebyshev border radius");
    pipe_cmd->add_option("--kmeans-iters", pipe_kmeans, "k-means iteration cap");
    pipe_cmd->add_flag("--no-log", pipe_no_log, "Cluster raw filtered values");
    pipe_cmd->add_option("--set", overrides, "Extra key=value overrides")
        ->expected(-1);

    try {
        app.parse(argc, argv);

        if (sim_cmd->parsed()) {
            CommonArgs c = common;
            return run_simulate(c, sim_cfg);
        }
        if (stats_cmd->parsed()) return run_stats(common, stack, positions, no_log, png);
        if (select_cmd->parsed())
            return run_select(common, absorption_csv, com_csv, border, border_rows,
                              border_cols, kmeans_iters, png);
        if (filter_cmd->parsed()) return run_filter(common, stack, positions, mask_csv);
        if (recon_cmd->parsed())
            return run_reconstruct(common, stack, positions, probe_diameter, iterations,
                                   object_step, png);
        if (ssim_cmd->parsed()) return run_ssim(grid_a, grid_b);
        if (pipe_cmd->parsed()) {
            PipelineConfig cfg;
            if (!config_path.empty()) cfg = parse_config_file(config_path);
            for (const auto& kv : overrides) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos)
                    throw FormatError("--set expects key=value, got '" + kv + "'");
                apply_config_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
            }
            if (pipe_out) cfg.out_dir = *pipe_out;
            if (pipe_seed) cfg.seed = *pipe_seed;
            if (pipe_threads) cfg.threads = *pipe_threads;
            if (pipe_border) cfg.border = *pipe_border;
            if (pipe_kmeans) cfg.kmeans_iters = *pipe_kmeans;
            if (pipe_no_log) cfg.log_scale = false;
            return run_pipeline_cmd(cfg);
        }
        return 1;
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
