#include "ptyroi/clustering.hpp"

#include "ptyroi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ptyroi {

namespace {

// Assigns to the nearer centroid, ties to the lower one. Returns true when
// any label changed.
bool assign_labels(std::span<const double> values, std::array<double, 2> c,
                   std::vector<std::uint8_t>& labels) {
    const double mid = 0.5 * (c[0] + c[1]);
    bool changed = false;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const std::uint8_t label = values[i] <= mid ? 0 : 1;
        if (labels[i] != label) {
            labels[i] = label;
            changed = true;
        }
    }
    return changed;
}

std::array<double, 2> cluster_means(std::span<const double> values,
                                    const std::vector<std::uint8_t>& labels) {
    double sum[2] = {0.0, 0.0};
    std::size_t count[2] = {0, 0};
    for (std::size_t i = 0; i < values.size(); ++i) {
        sum[labels[i]] += values[i];
        ++count[labels[i]];
    }
    return {sum[0] / static_cast<double>(count[0]), sum[1] / static_cast<double>(count[1])};
}

double partition_wcss(std::span<const double> values, const std::vector<std::uint8_t>& labels,
                      std::array<double, 2> means) {
    double wcss = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = values[i] - means[labels[i]];
        wcss += d * d;
    }
    return wcss;
}

struct ThresholdCut {
    double threshold;
    bool found = false;
};

// Exact optimal 2-way threshold cut by prefix-sum scan over the sorted
// values. Equal-WCSS ties resolve to the leftmost cut.
ThresholdCut best_threshold_cut(std::span<const double> values) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();

    std::vector<double> prefix(n + 1, 0.0), prefix_sq(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        prefix[i + 1] = prefix[i] + sorted[i];
        prefix_sq[i + 1] = prefix_sq[i] + sorted[i] * sorted[i];
    }

    ThresholdCut cut{0.0, false};
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < n; ++i) {
        if (sorted[i - 1] == sorted[i]) continue;
        const double nl = static_cast<double>(i), nr = static_cast<double>(n - i);
        const double sl = prefix[i], sr = prefix[n] - prefix[i];
        const double wcss = (prefix_sq[i] - sl * sl / nl) +
                            (prefix_sq[n] - prefix_sq[i] - sr * sr / nr);
        if (wcss < best) {
            best = wcss;
            cut.threshold = sorted[i - 1];
            cut.found = true;
        }
    }
    return cut;
}

}  // namespace

KMeansResult kmeans2(std::span<const double> values, int max_iters) {
    if (values.size() < 2) throw SizeError("kmeans2 needs at least 2 values");
    double lo = values[0], hi = values[0];
    for (const double v : values) {
        if (!std::isfinite(v)) throw DataError("kmeans2 input must be finite");
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (lo == hi) throw NumericalError("kmeans2 input is degenerate: all values identical");

    KMeansResult res;
    res.labels.assign(values.size(), 0);
    res.centroids = {lo, hi};
    assign_labels(values, res.centroids, res.labels);
    res.centroids = cluster_means(values, res.labels);
    res.iterations_run = 1;
    for (int iter = 1; iter < max_iters; ++iter) {
        if (!assign_labels(values, res.centroids, res.labels)) break;
        res.centroids = cluster_means(values, res.labels);
        res.iterations_run = iter + 1;
    }
    res.wcss = partition_wcss(values, res.labels, res.centroids);

    const ThresholdCut cut = best_threshold_cut(values);
    if (cut.found) {
        std::vector<std::uint8_t> cut_labels(values.size());
        for (std::size_t i = 0; i < values.size(); ++i)
            cut_labels[i] = values[i] <= cut.threshold ? 0 : 1;
        const auto cut_means = cluster_means(values, cut_labels);
        const double cut_wcss = partition_wcss(values, cut_labels, cut_means);
        if (cut_wcss < res.wcss) {
            res.labels = std::move(cut_labels);
            res.centroids = cut_means;
            res.wcss = cut_wcss;
        }
    }
    return res;
}

namespace {

RoiMask select_cluster(const StatMap& m, std::uint8_t wanted_label, int max_iters) {
    const std::vector<double> values = m.occupied_values();
    const KMeansResult km = kmeans2(values, max_iters);

    RoiMask mask;
    mask.occupied = m.occupied;
    mask.cells = Grid<std::uint8_t>(m.values.rows(), m.values.cols(), 0);
    std::size_t next = 0;
    for (std::size_t i = 0; i < m.values.size(); ++i) {
        if (!m.occupied.flat()[i]) continue;
        mask.cells.flat()[i] = km.labels[next++] == wanted_label ? 1 : 0;
    }
    return mask;
}

}  // namespace

RoiMask select_absorption_roi(const StatMap& m, int max_iters) {
    if (m.kind != MapKind::absorption)
        throw DataError("select_absorption_roi expects an absorption map");
    return select_cluster(m, 0, max_iters);
}

RoiMask select_scatter_roi(const StatMap& m, int max_iters) {
    if (m.kind != MapKind::com_magnitude)
        throw DataError("select_scatter_roi expects a CoM-magnitude map");
    return select_cluster(m, 1, max_iters);
}

RoiMask union_roi(const RoiMask& a, const RoiMask& b) {
    if (!a.cells.same_shape(b.cells) || !(a.occupied == b.occupied))
        throw GeometryError("union_roi: mask grids differ");
    RoiMask out = a;
    for (std::size_t i = 0; i < out.cells.size(); ++i)
        out.cells.flat()[i] = a.cells.flat()[i] || b.cells.flat()[i];
    return out;
}

RoiMask adjust_border_xy(const RoiMask& m, int border_rows, int border_cols) {
    const std::size_t rows = m.cells.rows(), cols = m.cells.cols();
    const auto limit = static_cast<long>(std::max(rows, cols));
    if (std::abs(static_cast<long>(border_rows)) > limit ||
        std::abs(static_cast<long>(border_cols)) > limit)
        throw SizeError("border exceeds grid size");
    if ((border_rows > 0 && border_cols < 0) || (border_rows < 0 && border_cols > 0))
        throw GeometryError("anisotropic border radii must not mix signs");
    if (border_rows == 0 && border_cols == 0) return m;

    const bool dilate = border_rows > 0 || border_cols > 0;
    const long br = std::abs(static_cast<long>(border_rows));
    const long bc = std::abs(static_cast<long>(border_cols));

    RoiMask out = m;
    for (long r = 0; r < static_cast<long>(rows); ++r) {
        for (long c = 0; c < static_cast<long>(cols); ++c) {
            bool hit = !dilate;
            for (long rr = r - br; rr <= r + br && hit != dilate; ++rr) {
                for (long cc = c - bc; cc <= c + bc; ++cc) {
                    const bool inside = rr >= 0 && rr < static_cast<long>(rows) &&
                                        cc >= 0 && cc < static_cast<long>(cols);
                    const bool set = inside && m.cells.at(static_cast<std::size_t>(rr),
                                                          static_cast<std::size_t>(cc));
                    if (dilate && set) {
                        hit = true;
                        break;
                    }
                    if (!dilate && !set) {
                        hit = false;
                        break;
                    }
                }
            }
            const bool occ = m.occupied.at(static_cast<std::size_t>(r),
                                           static_cast<std::size_t>(c)) != 0;
            out.cells.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) =
                (hit && occ) ? 1 : 0;
        }
    }
    if (!dilate && out.count_true() == 0)
        throw NumericalError("border erosion removed every selected cell");
    return out;
}

RoiMask adjust_border(const RoiMask& m, int border) {
    return adjust_border_xy(m, border, border);
}

double roi_fraction(const RoiMask& m) {
    const std::size_t occ = m.count_occupied();
    if (occ == 0) throw SizeError("roi_fraction needs at least one occupied cell");
    return static_cast<double>(m.count_true()) / static_cast<double>(occ);
}

}  // namespace ptyroi
