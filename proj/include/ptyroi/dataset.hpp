#pragma once

#include "ptyroi/grid.hpp"
#include "ptyroi/roi.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace ptyroi {

/// Non-owning view of one detector frame (rows x cols, row-major).
struct PatternView {
    const float* data = nullptr;
    std::size_t rows = 0;
    std::size_t cols = 0;

    PatternView() = default;
    PatternView(const float* d, std::size_t r, std::size_t c) : data(d), rows(r), cols(c) {}
    PatternView(const Grid<float>& g) : data(g.data()), rows(g.rows()), cols(g.cols()) {}

    std::size_t size() const { return rows * cols; }
    float at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

struct ScanPosition {
    std::uint32_t index = 0;  // 1-based frame index
    std::uint32_t row = 0;    // 1-based scan-grid row
    std::uint32_t col = 0;    // 1-based scan-grid column
    double x_um = 0.0;
    double y_um = 0.0;

    friend bool operator==(const ScanPosition&, const ScanPosition&) = default;
};

/// K uniform NxM diffraction patterns plus their scan positions. Frames are
/// stored contiguously (frame-major, row-major within a frame) so loading and
/// per-frame reductions touch one linear buffer.
struct ScanDataset {
    std::size_t frame_rows = 0;
    std::size_t frame_cols = 0;
    std::vector<float> frames;
    std::vector<ScanPosition> positions;
    std::size_t grid_rows = 0;
    std::size_t grid_cols = 0;
    double step_um = 0.0;

    std::size_t num_frames() const { return positions.size(); }
    std::size_t frame_size() const { return frame_rows * frame_cols; }

    PatternView frame(std::size_t k) const {
        return {frames.data() + k * frame_size(), frame_rows, frame_cols};
    }
    std::span<float> frame_values(std::size_t k) {
        return {frames.data() + k * frame_size(), frame_size()};
    }
    std::span<const float> frame_values(std::size_t k) const {
        return {frames.data() + k * frame_size(), frame_size()};
    }

    /// Checks the type invariants; throws on violation.
    void validate() const;
};

/// Reads a PTYS stack plus its positions CSV (see README for the layout).
/// Frames may be read in parallel; the result is identical to a sequential
/// read. threads <= 0 means use all hardware threads.
ScanDataset load_dataset(const std::filesystem::path& stack_path,
                         const std::filesystem::path& positions_path, int threads = 0);

void save_dataset(const ScanDataset& ds, const std::filesystem::path& stack_path,
                  const std::filesystem::path& positions_path);

/// Keeps exactly the (pattern, position) pairs whose scan cell is true in
/// mask, in original order. Positions are renumbered 1..K' so the result is a
/// valid standalone dataset; grid geometry and step are preserved so
/// reconstructions of the full and filtered datasets share one object grid.
ScanDataset filter_dataset(const ScanDataset& ds, const RoiMask& mask);

/// Original 1-based indices of the frames a filter with this mask would keep.
std::vector<std::uint32_t> retained_indices(const ScanDataset& ds, const RoiMask& mask);

/// Writes a one-column CSV (header `index`) of retained original indices.
void save_retained_indices(const std::vector<std::uint32_t>& indices,
                           const std::filesystem::path& path);

/// Real-valued image in the stack format with K=1 (reconstruction exports).
void save_grid_f32(const Grid<double>& g, const std::filesystem::path& path);
Grid<double> load_grid_f32(const std::filesystem::path& path);

}  // namespace ptyroi
