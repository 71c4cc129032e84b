#pragma once

#include "ptyroi/dataset.hpp"
#include "ptyroi/errors.hpp"
#include "ptyroi/grid.hpp"
#include "ptyroi/simulator.hpp"

#include <complex>
#include <cstdint>
#include <vector>

namespace ptyroi {

struct EpieOptions {
    int iterations = 100;
    double object_step = 1.0;
    std::uint64_t seed = 0;
};

struct ReconImage {
    Grid<std::complex<double>> object_estimate;
    double pixel_pitch = 1.0;
    int iterations = 0;
    std::vector<double> error_trace;  // mean squared modulus misfit per iteration
};

/// Classic ePIE object update with a known probe (no probe refinement).
/// Frames are visited in a freshly shuffled order each iteration, seeded from
/// opt.seed, so a fixed seed gives a bitwise deterministic result. The object
/// grid covers the union of all probe windows of the full scan grid, so full
/// and RoI-filtered datasets reconstruct onto the same grid.
ReconImage epie_reconstruct(const ScanDataset& ds, const Probe& probe,
                            const EpieOptions& opt = {});

Grid<double> phase_image(const ReconImage& r);
Grid<double> modulus_image(const ReconImage& r);

/// Removes the global phase ambiguity: rotates img by the phase that best
/// matches ref (argmax of Re sum(img * e^{-i phi} * conj(ref))).
Grid<std::complex<double>> align_global_phase(const Grid<std::complex<double>>& img,
                                              const Grid<std::complex<double>>& ref);

/// Mean local SSIM: 11x11 Gaussian window (sigma 1.5), K1=0.01, K2=0.03,
/// dynamic range = joint max - joint min. Two identical constant images
/// (range 0) score 1 by convention.
double ssim(const Grid<double>& a, const Grid<double>& b);

struct CropRect {
    std::size_t row0 = 0, col0 = 0, rows = 0, cols = 0;
};

/// Tight bounding box of the true cells.
CropRect support_bbox(const Grid<std::uint8_t>& support);

template <typename T>
Grid<T> crop(const Grid<T>& g, const CropRect& rect) {
    if (rect.row0 + rect.rows > g.rows() || rect.col0 + rect.cols > g.cols())
        throw GeometryError("crop rectangle outside grid");
    Grid<T> out(rect.rows, rect.cols);
    for (std::size_t r = 0; r < rect.rows; ++r)
        for (std::size_t c = 0; c < rect.cols; ++c)
            out.at(r, c) = g.at(rect.row0 + r, rect.col0 + c);
    return out;
}

}  // namespace ptyroi
