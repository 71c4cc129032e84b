#pragma once

#include "ptyroi/roi.hpp"
#include "ptyroi/stats.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace ptyroi {

struct KMeansResult {
    std::vector<std::uint8_t> labels;      // 0 = lower centroid, 1 = higher
    std::array<double, 2> centroids{};     // ascending
    int iterations_run = 0;
    double wcss = 0.0;                     // within-cluster sum of squares
};

/// Deterministic 1-D 2-means. Lloyd iterations start from (min, max), cap at
/// max_iters, ties assign to the lower centroid. Lloyd from this start can
/// converge to a non-optimal cut on some inputs, so the result is checked
/// against the exact best threshold cut (prefix-sum scan over the sorted
/// values) and the better partition wins. No randomness anywhere.
KMeansResult kmeans2(std::span<const double> values, int max_iters = 10);

/// Clusters the occupied cells of an absorption map; selects the LOW cluster
/// (low transmission = material).
RoiMask select_absorption_roi(const StatMap& m, int max_iters = 10);

/// Clusters the occupied cells of a CoM-magnitude map; selects the HIGH
/// cluster (strong deflection = feature edges).
RoiMask select_scatter_roi(const StatMap& m, int max_iters = 10);

/// Cellwise OR; overlapping selections count once.
RoiMask union_roi(const RoiMask& a, const RoiMask& b);

/// border > 0 dilates the true set by a square structuring element of
/// Chebyshev radius `border`, clipped to occupied cells; border < 0 erodes by
/// the same element (out-of-grid and unoccupied neighbors count as false);
/// border == 0 is the identity.
RoiMask adjust_border(const RoiMask& m, int border);

/// Anisotropic variant with independent row/col radii. Signs must agree.
RoiMask adjust_border_xy(const RoiMask& m, int border_rows, int border_cols);

double roi_fraction(const RoiMask& m);

}  // namespace ptyroi
