#include "ptyroi/pipeline.hpp"

#include "ptyroi/errors.hpp"
#include "ptyroi/png.hpp"
#include "ptyroi/recon.hpp"
#include "ptyroi/simulator.hpp"
#include "ptyroi/text.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

namespace ptyroi {

namespace fs = std::filesystem;

namespace {

bool parse_bool(std::string_view v) {
    if (v == "1" || v == "true" || v == "on") return true;
    if (v == "0" || v == "false" || v == "off") return false;
    throw FormatError("invalid boolean: '" + std::string(v) + "'");
}

std::vector<std::string> read_lines(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// SSIM needs an 11x11 window; skip the support crop when it would be smaller.
constexpr std::size_t kMinSsimSide = 11;

[[noreturn]] void rethrow_with_stage(const std::string& stage) {
    const std::string prefix = "stage " + stage + ": ";
    try {
        throw;
    } catch (const FormatError& e) {
        throw FormatError(prefix + e.what());
    } catch (const DataError& e) {
        throw DataError(prefix + e.what());
    } catch (const GeometryError& e) {
        throw GeometryError(prefix + e.what());
    } catch (const SizeError& e) {
        throw SizeError(prefix + e.what());
    } catch (const IoError& e) {
        throw IoError(prefix + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(prefix + e.what());
    } catch (const std::exception& e) {
        throw Error(prefix + e.what());
    }
}

}  // namespace

void apply_config_override(PipelineConfig& cfg, std::string_view key, std::string_view value) {
    const std::string k(text::trim(key));
    const std::string_view v = text::trim(value);
    if (k == "stack") cfg.stack = v;
    else if (k == "positions") cfg.positions = v;
    else if (k == "phantom_px") cfg.phantom_px = text::parse_uint(v);
    else if (k == "probe_px") cfg.probe_px = text::parse_uint(v);
    else if (k == "probe_diameter") cfg.probe_diameter = text::parse_uint(v);
    else if (k == "grid_rows") cfg.grid_rows = text::parse_uint(v);
    else if (k == "grid_cols") cfg.grid_cols = text::parse_uint(v);
    else if (k == "step_px") cfg.step_px = text::parse_uint(v);
    else if (k == "alpha") cfg.alpha = text::parse_double(v);
    else if (k == "phi") cfg.phi = text::parse_double(v);
    else if (k == "photons") cfg.photons = text::parse_double(v);
    else if (k == "filter") cfg.filter = parse_bool(v);
    else if (k == "log") cfg.log_scale = parse_bool(v);
    else if (k == "kmeans_iters") cfg.kmeans_iters = static_cast<int>(text::parse_int(v));
    else if (k == "border") cfg.border = static_cast<int>(text::parse_int(v));
    else if (k == "border_rows") cfg.border_rows = static_cast<int>(text::parse_int(v));
    else if (k == "border_cols") cfg.border_cols = static_cast<int>(text::parse_int(v));
    else if (k == "recon") cfg.recon = parse_bool(v);
    else if (k == "recon_iters") cfg.recon_iters = static_cast<int>(text::parse_int(v));
    else if (k == "recon_step") cfg.recon_step = text::parse_double(v);
    else if (k == "seed") cfg.seed = text::parse_uint(v);
    else if (k == "threads") cfg.threads = static_cast<int>(text::parse_int(v));
    else if (k == "png") cfg.png = parse_bool(v);
    else if (k == "out") cfg.out_dir = v;
    else throw FormatError("unknown config key: '" + k + "'");
}

PipelineConfig parse_config_file(const fs::path& path) {
    PipelineConfig cfg;
    for (const auto& raw : read_lines(path)) {
        const std::string_view line = text::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw FormatError("config line is not key=value: '" + std::string(line) + "'");
        apply_config_override(cfg, line.substr(0, eq), line.substr(eq + 1));
    }
    return cfg;
}

void write_stat_csv(const StatMap& m, const std::vector<ScanPosition>& positions,
                    const fs::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write stat csv: " + path.string());
    out << "index,row,col,value\n";
    for (const auto& p : positions) {
        if (!m.occupied.at(p.row - 1, p.col - 1)) continue;
        out << p.index << ',' << p.row << ',' << p.col << ','
            << text::format_double(m.values.at(p.row - 1, p.col - 1)) << '\n';
    }
    if (!out) throw IoError("stat csv: write failed");
}

std::pair<StatMap, std::vector<ScanPosition>> read_stat_csv(const fs::path& path,
                                                            MapKind kind) {
    const auto lines = read_lines(path);
    if (lines.empty() || text::trim(lines.front()) != "index,row,col,value")
        throw FormatError("stat csv: bad header in " + path.string());

    std::vector<ScanPosition> positions;
    std::vector<double> values;
    std::size_t grid_rows = 0, grid_cols = 0;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::string_view line = text::trim(lines[i]);
        if (line.empty()) continue;
        const auto fields = text::split(line, ',');
        if (fields.size() != 4) throw FormatError("stat csv: expected 4 fields");
        ScanPosition p;
        p.index = static_cast<std::uint32_t>(text::parse_uint(fields[0]));
        p.row = static_cast<std::uint32_t>(text::parse_uint(fields[1]));
        p.col = static_cast<std::uint32_t>(text::parse_uint(fields[2]));
        if (p.row < 1 || p.col < 1) throw DataError("stat csv: row/col must be >= 1");
        positions.push_back(p);
        values.push_back(text::parse_double(fields[3]));
        grid_rows = std::max<std::size_t>(grid_rows, p.row);
        grid_cols = std::max<std::size_t>(grid_cols, p.col);
    }
    if (positions.empty()) throw DataError("stat csv: no data rows");
    return {build_stat_map(values, positions, grid_rows, grid_cols, kind), positions};
}

void write_roi_mask_csv(const RoiMask& mask, const std::vector<ScanPosition>& positions,
                        const fs::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write mask csv: " + path.string());
    out << "index,row,col,selected\n";
    for (const auto& p : positions) {
        if (!mask.occupied.at(p.row - 1, p.col - 1)) continue;
        out << p.index << ',' << p.row << ',' << p.col << ','
            << (mask.cells.at(p.row - 1, p.col - 1) ? 1 : 0) << '\n';
    }
    if (!out) throw IoError("mask csv: write failed");
}

RoiMask read_roi_mask_csv(const fs::path& path) {
    const auto lines = read_lines(path);
    if (lines.empty() || text::trim(lines.front()) != "index,row,col,selected")
        throw FormatError("mask csv: bad header in " + path.string());

    struct Row {
        std::uint32_t row, col;
        bool selected;
    };
    std::vector<Row> rows;
    std::size_t grid_rows = 0, grid_cols = 0;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::string_view line = text::trim(lines[i]);
        if (line.empty()) continue;
        const auto fields = text::split(line, ',');
        if (fields.size() != 4) throw FormatError("mask csv: expected 4 fields");
        Row r;
        r.row = static_cast<std::uint32_t>(text::parse_uint(fields[1]));
        r.col = static_cast<std::uint32_t>(text::parse_uint(fields[2]));
        const auto sel = text::parse_uint(fields[3]);
        if (sel > 1) throw DataError("mask csv: selected must be 0 or 1");
        if (r.row < 1 || r.col < 1) throw DataError("mask csv: row/col must be >= 1");
        r.selected = sel == 1;
        rows.push_back(r);
        grid_rows = std::max<std::size_t>(grid_rows, r.row);
        grid_cols = std::max<std::size_t>(grid_cols, r.col);
    }
    if (rows.empty()) throw DataError("mask csv: no data rows");

    RoiMask mask;
    mask.cells = Grid<std::uint8_t>(grid_rows, grid_cols, 0);
    mask.occupied = Grid<std::uint8_t>(grid_rows, grid_cols, 0);
    for (const auto& r : rows) {
        auto& occ = mask.occupied.at(r.row - 1, r.col - 1);
        if (occ) throw GeometryError("mask csv: duplicate cell");
        occ = 1;
        mask.cells.at(r.row - 1, r.col - 1) = r.selected ? 1 : 0;
    }
    return mask;
}

void write_roi_summary_json(const RoiSummary& s, const fs::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write summary: " + path.string());
    out << "{\n"
        << "  \"occupied\": " << s.occupied << ",\n"
        << "  \"absorption_count\": " << s.absorption_count << ",\n"
        << "  \"scatter_count\": " << s.scatter_count << ",\n"
        << "  \"overlap_count\": " << s.overlap_count << ",\n"
        << "  \"union_count\": " << s.union_count << ",\n"
        << "  \"border\": " << s.border << ",\n"
        << "  \"selected_count\": " << s.selected_count << ",\n"
        << "  \"fraction\": " << text::format_double(s.fraction) << "\n"
        << "}\n";
    if (!out) throw IoError("summary: write failed");
}

void write_timing_json(const TimingReport& r, const fs::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write timing report: " + path.string());
    out << "{\n  \"stages\": {\n";
    for (std::size_t i = 0; i < r.stages.size(); ++i) {
        out << "    \"" << r.stages[i].name << "\": "
            << text::format_double(r.stages[i].seconds)
            << (i + 1 < r.stages.size() ? ",\n" : "\n");
    }
    out << "  },\n"
        << "  \"total_seconds\": " << text::format_double(r.total_seconds) << ",\n"
        << "  \"frames_in\": " << r.frames_in << ",\n"
        << "  \"frames_out\": " << r.frames_out;
    if (!std::isnan(r.ssim_score))
        out << ",\n  \"ssim\": " << text::format_double(r.ssim_score);
    out << "\n}\n";
    if (!out) throw IoError("timing report: write failed");
}

TimingReport run_pipeline(const PipelineConfig& cfg) {
    TimingReport report;
    fs::create_directories(cfg.out_dir);
    const fs::path out_dir(cfg.out_dir);
    std::vector<fs::path> written;
    auto track = [&](fs::path p) {
        written.push_back(p);
        return p;
    };

    const auto total_start = std::chrono::steady_clock::now();
    std::string current_stage;
    auto stage_start = total_start;
    auto begin_stage = [&](const char* name) {
        current_stage = name;
        stage_start = std::chrono::steady_clock::now();
    };
    auto end_stage = [&] {
        report.stages.push_back({current_stage, seconds_since(stage_start)});
    };

    try {
        ScanDataset ds;
        Phantom phantom;
        const bool simulated = cfg.stack.empty();

        begin_stage("input");
        if (simulated) {
            phantom = shepp_logan(cfg.phantom_px, cfg.alpha, cfg.phi);
            const Probe probe = circular_probe(cfg.probe_px, cfg.probe_diameter);
            SimulateOptions opt;
            opt.geometry = {cfg.grid_rows, cfg.grid_cols, cfg.step_px};
            opt.photons = cfg.photons;
            opt.seed = cfg.seed;
            opt.threads = cfg.threads;
            ds = simulate_scan(phantom, probe, opt);
            save_dataset(ds, track(out_dir / "dataset.ptys"), track(out_dir / "positions.csv"));
        } else {
            if (cfg.positions.empty())
                throw DataError("config sets 'stack' but not 'positions'");
            ds = load_dataset(cfg.stack, cfg.positions, cfg.threads);
        }
        report.frames_in = ds.num_frames();
        end_stage();

        begin_stage("stats");
        const ScanStatistics st = compute_scan_statistics(ds, cfg.threads);
        StatMap absorption = mean_filter_3x3(st.absorption);
        StatMap com_mag = mean_filter_3x3(st.com_mag);
        if (cfg.log_scale) {
            absorption = log_transform(absorption, default_log_epsilon(absorption));
            com_mag = log_transform(com_mag, default_log_epsilon(com_mag));
        }
        write_stat_csv(absorption, ds.positions, track(out_dir / "absorption.csv"));
        write_stat_csv(com_mag, ds.positions, track(out_dir / "com_magnitude.csv"));
        if (cfg.png) {
            write_png_gray(to_gray(absorption.values, &absorption.occupied),
                           track(out_dir / "absorption.png"));
            write_png_gray(to_gray(com_mag.values, &com_mag.occupied),
                           track(out_dir / "com_magnitude.png"));
        }
        end_stage();

        begin_stage("clustering");
        const RoiMask mask_a = select_absorption_roi(absorption, cfg.kmeans_iters);
        const RoiMask mask_s = select_scatter_roi(com_mag, cfg.kmeans_iters);
        end_stage();

        begin_stage("selection");
        const RoiMask joined = union_roi(mask_a, mask_s);
        RoiSummary summary;
        summary.occupied = joined.count_occupied();
        summary.absorption_count = mask_a.count_true();
        summary.scatter_count = mask_s.count_true();
        summary.union_count = joined.count_true();
        summary.overlap_count =
            summary.absorption_count + summary.scatter_count - summary.union_count;
        RoiMask selected = joined;
        if (cfg.border_rows || cfg.border_cols) {
            selected = adjust_border_xy(joined, cfg.border_rows.value_or(0),
                                        cfg.border_cols.value_or(0));
        } else if (cfg.border != 0) {
            selected = adjust_border(joined, cfg.border);
        }
        summary.border = cfg.border;
        summary.selected_count = selected.count_true();
        summary.fraction = roi_fraction(selected);
        report.absorption_count = summary.absorption_count;
        report.scatter_count = summary.scatter_count;
        report.overlap_count = summary.overlap_count;
        report.union_count = summary.union_count;
        report.selected_count = summary.selected_count;
        report.fraction = summary.fraction;
        write_roi_mask_csv(selected, ds.positions, track(out_dir / "roi_mask.csv"));
        write_roi_summary_json(summary, track(out_dir / "roi_summary.json"));
        if (cfg.png) {
            Grid<double> mask_img(selected.cells.rows(), selected.cells.cols(), 0.0);
            for (std::size_t i = 0; i < mask_img.size(); ++i)
                mask_img.flat()[i] = selected.cells.flat()[i] ? 1.0 : 0.0;
            write_png_gray(to_gray(mask_img), track(out_dir / "roi_mask.png"));
        }
        end_stage();

        begin_stage("filter");
        ScanDataset filtered;
        const bool need_filtered = cfg.filter || cfg.recon;
        if (need_filtered) filtered = filter_dataset(ds, selected);
        if (cfg.filter) {
            save_retained_indices(retained_indices(ds, selected),
                                  track(out_dir / "retained.csv"));
            save_dataset(filtered, track(out_dir / "filtered.ptys"),
                         track(out_dir / "filtered_positions.csv"));
            report.frames_out = filtered.num_frames();
        } else {
            report.frames_out = ds.num_frames();
        }
        end_stage();

        begin_stage("reconstruction");
        if (cfg.recon) {
            const Probe probe = circular_probe(ds.frame_rows, cfg.probe_diameter);
            EpieOptions opt;
            opt.iterations = cfg.recon_iters;
            opt.object_step = cfg.recon_step;
            opt.seed = cfg.seed;
            const ReconImage full = epie_reconstruct(ds, probe, opt);
            ReconImage roi = epie_reconstruct(filtered, probe, opt);

            // Compare over the phantom support bounding box when the geometry
            // is known; the excluded background is unconstrained in the RoI
            // reconstruction. The global phase is aligned over the same region
            // the score is computed on.
            Grid<std::complex<double>> full_obj = full.object_estimate;
            Grid<std::complex<double>> roi_obj = roi.object_estimate;
            if (simulated) {
                const auto [origin_r, origin_c] = scan_window_origin(
                    cfg.phantom_px, cfg.phantom_px, cfg.probe_px,
                    {cfg.grid_rows, cfg.grid_cols, cfg.step_px});
                const CropRect box = support_bbox(phantom.support);
                const std::size_t beg_r = box.row0 > origin_r ? box.row0 - origin_r : 0;
                const std::size_t beg_c = box.col0 > origin_c ? box.col0 - origin_c : 0;
                const std::size_t end_r =
                    std::min(box.row0 + box.rows > origin_r ? box.row0 + box.rows - origin_r : 0,
                             full_obj.rows());
                const std::size_t end_c =
                    std::min(box.col0 + box.cols > origin_c ? box.col0 + box.cols - origin_c : 0,
                             full_obj.cols());
                if (end_r >= beg_r + kMinSsimSide && end_c >= beg_c + kMinSsimSide) {
                    const CropRect obj_box{beg_r, beg_c, end_r - beg_r, end_c - beg_c};
                    full_obj = crop(full_obj, obj_box);
                    roi_obj = crop(roi_obj, obj_box);
                }
            }
            roi_obj = align_global_phase(roi_obj, full_obj);
            ReconImage full_view{full_obj, full.pixel_pitch, full.iterations, {}};
            ReconImage roi_view{roi_obj, roi.pixel_pitch, roi.iterations, {}};
            report.ssim_score = ssim(phase_image(full_view), phase_image(roi_view));
            roi.object_estimate =
                align_global_phase(roi.object_estimate, full.object_estimate);

            save_grid_f32(modulus_image(full), track(out_dir / "recon_full_modulus.ptys"));
            save_grid_f32(phase_image(full), track(out_dir / "recon_full_phase.ptys"));
            save_grid_f32(modulus_image(roi), track(out_dir / "recon_roi_modulus.ptys"));
            save_grid_f32(phase_image(roi), track(out_dir / "recon_roi_phase.ptys"));
            if (cfg.png) {
                write_png_gray(to_gray(modulus_image(full)),
                               track(out_dir / "recon_full_modulus.png"));
                write_png_gray(to_gray(phase_image(full)),
                               track(out_dir / "recon_full_phase.png"));
                write_png_gray(to_gray(modulus_image(roi)),
                               track(out_dir / "recon_roi_modulus.png"));
                write_png_gray(to_gray(phase_image(roi)),
                               track(out_dir / "recon_roi_phase.png"));
            }
        }
        end_stage();
    } catch (...) {
        std::error_code ec;
        for (const auto& p : written) fs::remove(p, ec);
        rethrow_with_stage(current_stage);
    }

    report.total_seconds = seconds_since(total_start);
    write_timing_json(report, out_dir / "timing.json");
    return report;
}

}  // namespace ptyroi
