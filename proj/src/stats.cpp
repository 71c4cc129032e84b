#include "ptyroi/stats.hpp"

#include "ptyroi/errors.hpp"
#include "ptyroi/kernels.hpp"
#include "ptyroi/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ptyroi {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

struct FrameMoments {
    double total;
    double row_dot;  // sum over r of r * rowsum, r zero-based
    double col_dot;  // sum over c of c * value, c zero-based
};

FrameMoments frame_moments(PatternView p) {
    FrameMoments fm{0.0, 0.0, 0.0};
    for (std::size_t r = 0; r < p.rows; ++r) {
        const auto [rowsum, cdot] = kernels::moments_f32(p.data + r * p.cols, p.cols);
        fm.total += rowsum;
        fm.row_dot += static_cast<double>(r) * rowsum;
        fm.col_dot += cdot;
    }
    return fm;
}

}  // namespace

double total_intensity(PatternView p) { return kernels::sum_f32(p.data, p.size()); }

std::array<double, 2> center_of_mass(PatternView p) {
    const FrameMoments fm = frame_moments(p);
    if (fm.total <= 0.0)
        throw NumericalError("center of mass undefined for zero total intensity");
    return {1.0 + fm.row_dot / fm.total, 1.0 + fm.col_dot / fm.total};
}

CoMTable standardize(const std::vector<std::array<double, 2>>& raw) {
    const std::size_t k = raw.size();
    if (k < 2) throw SizeError("standardization needs at least 2 rows");

    CoMTable t;
    t.raw = raw;
    double sum_x = 0.0, sum_y = 0.0;
    for (const auto& r : raw) {
        sum_x += r[0];
        sum_y += r[1];
    }
    t.mean_x = sum_x / static_cast<double>(k);
    t.mean_y = sum_y / static_cast<double>(k);

    double ss_x = 0.0, ss_y = 0.0;
    for (const auto& r : raw) {
        const double dx = r[0] - t.mean_x;
        const double dy = r[1] - t.mean_y;
        ss_x += dx * dx;
        ss_y += dy * dy;
    }
    t.sigma_x = std::sqrt(ss_x / static_cast<double>(k - 1));
    t.sigma_y = std::sqrt(ss_y / static_cast<double>(k - 1));
    if (t.sigma_x == 0.0 || t.sigma_y == 0.0)
        throw NumericalError("degenerate CoM axis: zero spread");

    t.standardized.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        t.standardized[i] = {(raw[i][0] - t.mean_x) / t.sigma_x,
                             (raw[i][1] - t.mean_y) / t.sigma_y};
    }
    return t;
}

std::vector<double> com_magnitude(const CoMTable& t) {
    std::vector<double> out(t.standardized.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::hypot(t.standardized[i][0], t.standardized[i][1]);
    return out;
}

std::vector<double> StatMap::occupied_values() const {
    std::vector<double> out;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (occupied.flat()[i]) out.push_back(values.flat()[i]);
    return out;
}

double StatMap::max_occupied() const {
    double best = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!occupied.flat()[i]) continue;
        any = true;
        best = std::max(best, values.flat()[i]);
    }
    if (!any) throw SizeError("stat map has no occupied cells");
    return best;
}

StatMap build_stat_map(std::span<const double> values,
                       const std::vector<ScanPosition>& positions, std::size_t grid_rows,
                       std::size_t grid_cols, MapKind kind) {
    if (values.size() != positions.size())
        throw DataError("stat-map value count does not match position count");
    StatMap m;
    m.kind = kind;
    m.values = Grid<double>(grid_rows, grid_cols, kNan);
    m.occupied = Grid<std::uint8_t>(grid_rows, grid_cols, 0);
    for (std::size_t i = 0; i < positions.size(); ++i) {
        const auto& p = positions[i];
        if (p.row < 1 || p.row > grid_rows || p.col < 1 || p.col > grid_cols)
            throw GeometryError("scan position outside stat-map grid");
        auto& occ = m.occupied.at(p.row - 1, p.col - 1);
        if (occ) throw GeometryError("duplicate scan cell in stat map");
        occ = 1;
        m.values.at(p.row - 1, p.col - 1) = values[i];
    }
    return m;
}

StatMap mean_filter_3x3(const StatMap& m) {
    StatMap out = m;
    const std::size_t rows = m.values.rows(), cols = m.values.cols();
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            if (!m.occupied.at(r, c)) continue;
            double total = 0.0;
            std::size_t count = 0;
            const std::size_t r0 = r > 0 ? r - 1 : 0;
            const std::size_t r1 = std::min(rows - 1, r + 1);
            const std::size_t c0 = c > 0 ? c - 1 : 0;
            const std::size_t c1 = std::min(cols - 1, c + 1);
            for (std::size_t rr = r0; rr <= r1; ++rr) {
                for (std::size_t cc = c0; cc <= c1; ++cc) {
                    if (!m.occupied.at(rr, cc)) continue;
                    total += m.values.at(rr, cc);
                    ++count;
                }
            }
            out.values.at(r, c) = total / static_cast<double>(count);
        }
    }
    return out;
}

StatMap log_transform(const StatMap& m, double epsilon) {
    if (!(epsilon > 0.0)) throw NumericalError("log epsilon must be positive");
    StatMap out = m;
    for (std::size_t i = 0; i < m.values.size(); ++i) {
        if (!m.occupied.flat()[i]) continue;
        const double shifted = m.values.flat()[i] + epsilon;
        if (!(shifted > 0.0))
            throw NumericalError("log transform outside domain: value + epsilon <= 0");
        out.values.flat()[i] = std::log(shifted);
    }
    return out;
}

double default_log_epsilon(const StatMap& m) {
    const double eps = 1e-12 * m.max_occupied();
    return std::max(eps, std::numeric_limits<double>::min());
}

FrameStats compute_frame_stats(const ScanDataset& ds, int threads) {
    const std::size_t k = ds.num_frames();
    FrameStats fs;
    fs.total.resize(k);
    fs.com.resize(k, {0.0, 0.0});
    fs.alive.resize(k, 0);

    parallel_for(k, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const FrameMoments fm = frame_moments(ds.frame(i));
            fs.total[i] = fm.total;
            if (fm.total > 0.0) {
                fs.alive[i] = 1;
                fs.com[i] = {1.0 + fm.row_dot / fm.total, 1.0 + fm.col_dot / fm.total};
            }
        }
    });
    for (std::size_t i = 0; i < k; ++i) fs.dead_count += fs.alive[i] ? 0 : 1;
    return fs;
}

ScanStatistics compute_scan_statistics(const ScanDataset& ds, int threads) {
    ScanStatistics s;
    s.frames = compute_frame_stats(ds, threads);
    const std::size_t k = ds.num_frames();

    std::vector<std::array<double, 2>> alive_rows;
    alive_rows.reserve(k - s.frames.dead_count);
    for (std::size_t i = 0; i < k; ++i)
        if (s.frames.alive[i]) alive_rows.push_back(s.frames.com[i]);
    s.table = standardize(alive_rows);
    const std::vector<double> alive_mag = com_magnitude(s.table);

    s.magnitude.assign(k, 0.0);
    std::size_t next = 0;
    for (std::size_t i = 0; i < k; ++i)
        if (s.frames.alive[i]) s.magnitude[i] = alive_mag[next++];

    s.absorption = build_stat_map(s.frames.total, ds.positions, ds.grid_rows, ds.grid_cols,
                                  MapKind::absorption);
    s.com_mag = build_stat_map(s.magnitude, ds.positions, ds.grid_rows, ds.grid_cols,
                               MapKind::com_magnitude);

    // Dead frames: unoccupied sentinel cells, excluded from filtering,
    // clustering, and selection.
    for (std::size_t i = 0; i < k; ++i) {
        if (s.frames.alive[i]) continue;
        const auto& p = ds.positions[i];
        s.absorption.values.at(p.row - 1, p.col - 1) =
            -std::numeric_limits<double>::infinity();
        s.absorption.occupied.at(p.row - 1, p.col - 1) = 0;
        s.com_mag.values.at(p.row - 1, p.col - 1) = 0.0;
        s.com_mag.occupied.at(p.row - 1, p.col - 1) = 0;
    }
    return s;
}

}  // namespace ptyroi
