#pragma once

#include "ptyroi/dataset.hpp"
#include "ptyroi/grid.hpp"

#include <array>
#include <complex>
#include <cstdint>

namespace ptyroi {

/// Complex transmission map plus the geometric support (union of the phantom
/// ellipses).
struct Phantom {
    Grid<std::complex<double>> transmission;
    Grid<std::uint8_t> support;
};

/// Standard ten-ellipse Shepp-Logan intensity map scaled to [0,1], embedded
/// as transmission exp(i*phi*I) * (1 - alpha*I).
Phantom shepp_logan(std::size_t n, double alpha = 0.3, double phi = 0.5);

struct Probe {
    Grid<std::complex<double>> amplitude;  // p x p, zero outside the disk
    std::size_t diameter_px = 0;

    double power() const;     // sum |amplitude|^2
    double max_abs2() const;  // max |amplitude|^2
};

/// Uniform unit amplitude inside the centered disk, zero outside.
Probe circular_probe(std::size_t p, std::size_t diameter_px);

/// Far-field pattern |FFT2(probe ⊙ object patch)|^2 with the zero frequency
/// moved to the grid center. The forward FFT is unnormalized.
Grid<float> forward_diffraction(const Phantom& obj, const Probe& probe,
                                std::size_t top_row, std::size_t top_col);

struct ScanGeometry {
    std::size_t grid_rows = 1;
    std::size_t grid_cols = 1;
    std::size_t step_px = 1;
};

/// Top-left phantom pixel of scan cell (1,1), centering the raster inside
/// the phantom.
std::array<std::size_t, 2> scan_window_origin(std::size_t phantom_rows,
                                              std::size_t phantom_cols,
                                              std::size_t probe_px, const ScanGeometry& g);

struct SimulateOptions {
    ScanGeometry geometry;
    /// Expected photon total of a free-space frame; 0 disables Poisson noise.
    double photons = 0.0;
    std::uint64_t seed = 0;
    int threads = 0;
};

/// Row-major raster scan: K = grid_rows * grid_cols frames; position k has
/// row = (k-1)/grid_cols + 1, col = (k-1)%grid_cols + 1, physical coordinates
/// row*step, col*step. Noise draws come from a per-frame stream (seed, k), so
/// results are bitwise independent of the thread count.
ScanDataset simulate_scan(const Phantom& obj, const Probe& probe,
                          const SimulateOptions& opt);

}  // namespace ptyroi
