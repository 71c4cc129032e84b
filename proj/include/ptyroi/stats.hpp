#pragma once

#include "ptyroi/dataset.hpp"
#include "ptyroi/grid.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace ptyroi {

/// Per-pattern absorption contrast T = sum of all pixels.
double total_intensity(PatternView p);

/// Intensity-weighted detector coordinates (Ox, Oy), 1-based; Ox runs along
/// the first (row) axis. Throws NumericalError when total intensity is zero.
std::array<double, 2> center_of_mass(PatternView p);

/// Raw and z-scored CoM coordinates with the standardization parameters.
struct CoMTable {
    std::vector<std::array<double, 2>> raw;
    std::vector<std::array<double, 2>> standardized;
    double mean_x = 0.0;
    double mean_y = 0.0;
    double sigma_x = 0.0;  // sample standard deviation (K-1 divisor)
    double sigma_y = 0.0;
};

/// Column-wise z-scoring of a K x 2 table, K >= 2. Throws NumericalError when
/// an axis has zero spread.
CoMTable standardize(const std::vector<std::array<double, 2>>& raw);

/// Euclidean norm of each standardized row.
std::vector<double> com_magnitude(const CoMTable& t);

enum class MapKind { absorption, com_magnitude };

/// Scalar field over the scan grid. Unoccupied cells hold NaN and are
/// excluded from every statistic and transform.
struct StatMap {
    Grid<double> values;
    Grid<std::uint8_t> occupied;
    MapKind kind = MapKind::absorption;

    /// Occupied-cell values in row-major grid order.
    std::vector<double> occupied_values() const;
    double max_occupied() const;
};

StatMap build_stat_map(std::span<const double> values,
                       const std::vector<ScanPosition>& positions, std::size_t grid_rows,
                       std::size_t grid_cols, MapKind kind);

/// Each occupied cell becomes the mean of the occupied cells in its 3x3
/// neighborhood (out-of-bounds and unoccupied neighbors excluded from both
/// numerator and denominator). Unoccupied cells pass through.
StatMap mean_filter_3x3(const StatMap& m);

/// Occupied cells become ln(value + epsilon).
StatMap log_transform(const StatMap& m, double epsilon);

/// 1e-12 of the maximum occupied value, floored at the smallest normal
/// double so all-zero maps stay in the log domain.
double default_log_epsilon(const StatMap& m);

/// Per-frame reductions over a dataset. Frames with T == 0 are flagged dead:
/// they carry no CoM, are excluded from standardization, and are never
/// selected into the RoI.
struct FrameStats {
    std::vector<double> total;
    std::vector<std::array<double, 2>> com;  // {0,0} placeholder on dead frames
    std::vector<std::uint8_t> alive;
    std::size_t dead_count = 0;
};

FrameStats compute_frame_stats(const ScanDataset& ds, int threads = 0);

/// Frame stats plus the two raw stat maps (absorption and CoM magnitude).
/// Dead frames appear as unoccupied cells carrying sentinels (-inf
/// absorption, 0 magnitude). The CoM table covers alive frames only, in
/// frame order.
struct ScanStatistics {
    FrameStats frames;
    CoMTable table;
    std::vector<double> magnitude;  // per frame, 0 on dead frames
    StatMap absorption;
    StatMap com_mag;
};

ScanStatistics compute_scan_statistics(const ScanDataset& ds, int threads = 0);

}  // namespace ptyroi
