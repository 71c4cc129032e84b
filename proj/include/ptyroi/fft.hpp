#pragma once

#include "ptyroi/grid.hpp"

#include <complex>
#include <cstddef>

// Thin wrapper around FFTW3 double-precision 2-D transforms. Forward is
// unnormalized; inverse is scaled by 1/(rows*cols) so ifft2(fft2(x)) == x.
// Plans are cached per shape with FFTW_ESTIMATE, which keeps planning cheap
// and results reproducible run to run.

namespace ptyroi::fft {

void fft2_inplace(std::complex<double>* data, std::size_t rows, std::size_t cols);
void ifft2_inplace(std::complex<double>* data, std::size_t rows, std::size_t cols);

Grid<std::complex<double>> fft2(const Grid<std::complex<double>>& in);
Grid<std::complex<double>> ifft2(const Grid<std::complex<double>>& in);

/// Cyclic shift moving the zero-frequency sample to the grid center
/// (numpy convention: roll by floor(n/2) along each axis).
template <typename T>
Grid<T> fftshift(const Grid<T>& in) {
    Grid<T> out(in.rows(), in.cols());
    const std::size_t dr = in.rows() / 2, dc = in.cols() / 2;
    for (std::size_t r = 0; r < in.rows(); ++r) {
        const std::size_t rr = (r + dr) % in.rows();
        for (std::size_t c = 0; c < in.cols(); ++c)
            out.at(rr, (c + dc) % in.cols()) = in.at(r, c);
    }
    return out;
}

/// Inverse of fftshift (distinct for odd sizes).
template <typename T>
Grid<T> ifftshift(const Grid<T>& in) {
    Grid<T> out(in.rows(), in.cols());
    const std::size_t dr = in.rows() / 2, dc = in.cols() / 2;
    for (std::size_t r = 0; r < in.rows(); ++r) {
        const std::size_t rr = (r + dr) % in.rows();
        for (std::size_t c = 0; c < in.cols(); ++c)
            out.at(r, c) = in.at(rr, (c + dc) % in.cols());
    }
    return out;
}

}  // namespace ptyroi::fft
