#include "ptyroi/fft.hpp"
#include "ptyroi/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

using namespace ptyroi;
using cplx = std::complex<double>;

namespace {

Grid<cplx> random_grid(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    SplitMix64 rng(seed);
    Grid<cplx> g(rows, cols);
    for (auto& v : g.flat()) v = {rng.uniform() * 2.0 - 1.0, rng.uniform() * 2.0 - 1.0};
    return g;
}

}  // namespace

TEST_CASE("impulse at the origin transforms to a flat spectrum") {
    Grid<cplx> g(8, 8, cplx{0.0, 0.0});
    g.at(0, 0) = 1.0;
    const auto f = fft::fft2(g);
    for (const auto& v : f.flat()) {
        CHECK(v.real() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(v.imag()) < 1e-12);
    }
}

TEST_CASE("constant input concentrates all energy in the DC bin") {
    Grid<cplx> g(16, 12, cplx{2.5, 0.0});
    const auto f = fft::fft2(g);
    CHECK(f.at(0, 0).real() == doctest::Approx(2.5 * 16 * 12).epsilon(1e-12));
    for (std::size_t r = 0; r < f.rows(); ++r)
        for (std::size_t c = 0; c < f.cols(); ++c)
            if (r != 0 || c != 0) CHECK(std::abs(f.at(r, c)) < 1e-9);
}

TEST_CASE("single plane wave lands in its own frequency bin") {
    const std::size_t n = 16;
    const std::size_t kr = 3, kc = 5;
    Grid<cplx> g(n, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            const double ph = 2.0 * std::numbers::pi *
                              (double(kr * r) / n + double(kc * c) / n);
            g.at(r, c) = std::polar(1.0, ph);
        }
    const auto f = fft::fft2(g);
    CHECK(std::abs(f.at(kr, kc) - cplx(double(n * n), 0.0)) < 1e-8);
    double off = 0.0;
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c)
            if (r != kr || c != kc) off = std::max(off, std::abs(f.at(r, c)));
    CHECK(off < 1e-8);
}

TEST_CASE("ifft2 inverts fft2 on random data") {
    for (auto [rows, cols] : {std::pair<std::size_t, std::size_t>{16, 16},
                              {7, 9},
                              {1, 5},
                              {32, 8}}) {
        const auto g = random_grid(rows, cols, 99 + rows * cols);
        const auto back = fft::ifft2(fft::fft2(g));
        for (std::size_t i = 0; i < g.size(); ++i)
            CHECK(std::abs(back.flat()[i] - g.flat()[i]) < 1e-12);
    }
}

TEST_CASE("Parseval: spectrum energy is rows*cols times signal energy") {
    const auto g = random_grid(24, 18, 1234);
    const auto f = fft::fft2(g);
    double es = 0.0, ef = 0.0;
    for (const auto& v : g.flat()) es += std::norm(v);
    for (const auto& v : f.flat()) ef += std::norm(v);
    CHECK(ef == doctest::Approx(es * 24.0 * 18.0).epsilon(1e-12));
}

TEST_CASE("fftshift moves DC to the center, even and odd sizes") {
    for (std::size_t n : {8u, 9u}) {
        Grid<double> g(n, n, 0.0);
        g.at(0, 0) = 1.0;
        const auto s = fft::fftshift(g);
        CHECK(s.at(n / 2, n / 2) == 1.0);
        double total = 0.0;
        for (auto v : s.flat()) total += v;
        CHECK(total == 1.0);
    }
}

TEST_CASE("ifftshift undoes fftshift for even and odd sizes") {
    for (auto [rows, cols] :
         {std::pair<std::size_t, std::size_t>{8, 8}, {9, 9}, {8, 9}, {9, 8}, {5, 12}}) {
        SplitMix64 rng(7 * rows + cols);
        Grid<double> g(rows, cols);
        for (auto& v : g.flat()) v = rng.uniform();
        CHECK(fft::ifftshift(fft::fftshift(g)) == g);
        CHECK(fft::fftshift(fft::ifftshift(g)) == g);
    }
}

TEST_CASE("fftshift and ifftshift differ on odd sizes") {
    Grid<int> g(5, 5);
    int k = 0;
    for (auto& v : g.flat()) v = k++;
    CHECK_FALSE(fft::fftshift(g) == fft::ifftshift(g));
}

TEST_CASE("plan cache returns consistent transforms across repeated calls") {
    const auto g = random_grid(16, 16, 5);
    const auto first = fft::fft2(g);
    for (int i = 0; i < 3; ++i) CHECK(fft::fft2(g) == first);
}
