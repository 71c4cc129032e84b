#include "ptyroi/errors.hpp"
#include "ptyroi/fft.hpp"
#include "ptyroi/simulator.hpp"
#include "ptyroi/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

using namespace ptyroi;
using cplx = std::complex<double>;

namespace {

// Independent transcription of the Shepp-Logan head phantom (original
// intensities): {A, a, b, x0, y0, theta_deg}.
constexpr double kTable[10][6] = {
    {2.00, 0.6900, 0.9200, 0.00, 0.0000, 0.0},
    {-0.98, 0.6624, 0.8740, 0.00, -0.0184, 0.0},
    {-0.02, 0.1100, 0.3100, 0.22, 0.0000, -18.0},
    {-0.02, 0.1600, 0.4100, -0.22, 0.0000, 18.0},
    {0.01, 0.2100, 0.2500, 0.00, 0.3500, 0.0},
    {0.01, 0.0460, 0.0460, 0.00, 0.1000, 0.0},
    {0.01, 0.0460, 0.0460, 0.00, -0.1000, 0.0},
    {0.01, 0.0460, 0.0230, -0.08, -0.6050, 0.0},
    {0.01, 0.0230, 0.0230, 0.00, -0.6060, 0.0},
    {0.01, 0.0230, 0.0460, 0.06, -0.6050, 0.0},
};

double oracle_intensity(double x, double y, bool* inside_any = nullptr) {
    double sum = 0.0;
    if (inside_any) *inside_any = false;
    for (const auto& e : kTable) {
        const double t = e[5] * std::numbers::pi / 180.0;
        const double dx = x - e[3], dy = y - e[4];
        const double xr = dx * std::cos(t) + dy * std::sin(t);
        const double yr = -dx * std::sin(t) + dy * std::cos(t);
        if (xr * xr / (e[1] * e[1]) + yr * yr / (e[2] * e[2]) <= 1.0) {
            sum += e[0];
            if (inside_any) *inside_any = true;
        }
    }
    return sum;
}

Phantom free_space(std::size_t n) {
    Phantom ph;
    ph.transmission = Grid<cplx>(n, n, {1.0, 0.0});
    ph.support = Grid<std::uint8_t>(n, n, 0);
    return ph;
}

double pattern_sum(PatternView p) {
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) total += p.data[i];
    return total;
}

}  // namespace

TEST_CASE("shepp_logan matches the ellipse-table oracle pixel for pixel") {
    const std::size_t n = 64;
    const double alpha = 0.3, phi = 0.5;
    const Phantom ph = shepp_logan(n, alpha, phi);
    const double half = n / 2.0;

    double max_i = 0.0;
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            const double x = ((c + 0.5) - half) / half;
            const double y = (half - (r + 0.5)) / half;
            max_i = std::max(max_i, oracle_intensity(x, y));
        }

    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            const double x = ((c + 0.5) - half) / half;
            const double y = (half - (r + 0.5)) / half;
            bool inside = false;
            const double v = oracle_intensity(x, y, &inside) / max_i;
            const cplx expect = std::polar(1.0 - alpha * v, phi * v);
            CHECK(ph.support.at(r, c) == (inside ? 1 : 0));
            CHECK(std::abs(ph.transmission.at(r, c) - expect) < 1e-14);
        }
}

TEST_CASE("phantom center is inside the outer ellipse, corners are free space") {
    const Phantom ph = shepp_logan(64);
    CHECK(ph.support.at(32, 32) == 1);
    for (auto [r, c] : {std::pair<std::size_t, std::size_t>{0, 0}, {0, 63}, {63, 0}, {63, 63}}) {
        CHECK(ph.support.at(r, c) == 0);
        CHECK(ph.transmission.at(r, c) == cplx{1.0, 0.0});
    }
}

TEST_CASE("phantom transmission modulus stays in [0, 1]") {
    const Phantom ph = shepp_logan(48, 1.0, 2.0);
    for (const auto& t : ph.transmission.flat()) {
        CHECK(std::abs(t) <= 1.0 + 1e-15);
        CHECK(std::abs(t) >= 0.0);
    }
}

TEST_CASE("support marks exactly the cells where transmission deviates from 1") {
    const Phantom ph = shepp_logan(32);
    for (std::size_t i = 0; i < ph.support.size(); ++i) {
        const bool deviates = ph.transmission.flat()[i] != cplx{1.0, 0.0};
        CHECK(deviates == (ph.support.flat()[i] != 0));
    }
}

TEST_CASE("phantom argument validation") {
    CHECK_THROWS_AS(shepp_logan(15), SizeError);
    CHECK_THROWS_AS(shepp_logan(32, 1.5), DataError);
    CHECK_THROWS_AS(shepp_logan(32, -0.1), DataError);
    CHECK_THROWS_AS(shepp_logan(32, 0.3, std::nan("")), DataError);
}

TEST_CASE("probe p=3 diameter=1 is a single center pixel") {
    const Probe probe = circular_probe(3, 1);
    std::size_t nonzero = 0;
    for (const auto& a : probe.amplitude.flat()) nonzero += a != cplx{0.0, 0.0};
    CHECK(nonzero == 1);
    CHECK(probe.amplitude.at(1, 1) == cplx{1.0, 0.0});
}

TEST_CASE("probe diameter 64 on a 64 grid rasterizes the full disk") {
    const Probe probe = circular_probe(64, 64);
    std::size_t expected = 0;
    for (int r = 0; r < 64; ++r)
        for (int c = 0; c < 64; ++c) {
            const double dr = r - 31.5, dc = c - 31.5;
            expected += dr * dr + dc * dc <= 32.0 * 32.0;
        }
    std::size_t nonzero = 0;
    for (const auto& a : probe.amplitude.flat()) nonzero += a != cplx{0.0, 0.0};
    CHECK(nonzero == expected);
    CHECK(probe.power() == double(expected));
    CHECK(probe.max_abs2() == 1.0);
}

TEST_CASE("probe diameter must fit the frame") {
    CHECK_THROWS_AS(circular_probe(8, 9), SizeError);
    CHECK_THROWS_AS(circular_probe(8, 0), SizeError);
}

TEST_CASE("free-space diffraction is |FFT(probe)|^2 and position independent") {
    const Phantom ph = free_space(40);
    const Probe probe = circular_probe(12, 8);
    const Grid<float> a = forward_diffraction(ph, probe, 0, 0);
    const Grid<float> b = forward_diffraction(ph, probe, 17, 23);
    CHECK(a == b);

    Grid<cplx> field = probe.amplitude;
    fft::fft2_inplace(field.data(), 12, 12);
    Grid<float> expect(12, 12);
    for (std::size_t i = 0; i < field.size(); ++i)
        expect.flat()[i] = static_cast<float>(std::norm(field.flat()[i]));
    expect = fft::fftshift(expect);
    CHECK(a == expect);
}

TEST_CASE("Parseval: pattern total equals p^2 times exit-wave energy") {
    const Phantom ph = shepp_logan(64);
    const Probe probe = circular_probe(16, 12);
    const std::size_t top_row = 20, top_col = 28;
    const Grid<float> pattern = forward_diffraction(ph, probe, top_row, top_col);

    double exit_energy = 0.0;
    for (std::size_t r = 0; r < 16; ++r)
        for (std::size_t c = 0; c < 16; ++c)
            exit_energy += std::norm(probe.amplitude.at(r, c) *
                                     ph.transmission.at(top_row + r, top_col + c));
    const double total = pattern_sum(pattern);
    CHECK(total == doctest::Approx(256.0 * exit_energy).epsilon(1e-5));
}

TEST_CASE("a linear phase ramp shifts the diffraction pattern sideways") {
    const std::size_t p = 16;
    const Probe probe = circular_probe(p, 12);

    Phantom ramp = free_space(p);
    for (std::size_t r = 0; r < p; ++r)
        for (std::size_t c = 0; c < p; ++c)
            ramp.transmission.at(r, c) =
                std::polar(1.0, 2.0 * std::numbers::pi * 2.0 * double(c) / double(p));

    const Grid<float> flat = forward_diffraction(free_space(p), probe, 0, 0);
    const Grid<float> shifted = forward_diffraction(ramp, probe, 0, 0);

    const auto com_flat = center_of_mass(flat);
    const auto com_shift = center_of_mass(shifted);
    CHECK(std::abs(com_shift[0] - com_flat[0]) < 1e-6);  // row axis untouched
    CHECK(com_shift[1] > com_flat[1] + 1.0);             // column CoM moved right

    // The whole pattern shifts cyclically by exactly the ramp frequency.
    for (std::size_t r = 0; r < p; ++r)
        for (std::size_t c = 0; c < p; ++c)
            CHECK(shifted.at(r, (c + 2) % p) ==
                  doctest::Approx(flat.at(r, c)).epsilon(1e-4));
}

TEST_CASE("probe window must stay inside the phantom") {
    const Phantom ph = free_space(20);
    const Probe probe = circular_probe(8, 8);
    CHECK_THROWS_AS(forward_diffraction(ph, probe, 13, 0), GeometryError);
    CHECK_THROWS_AS(forward_diffraction(ph, probe, 0, 13), GeometryError);
    CHECK_NOTHROW(forward_diffraction(ph, probe, 12, 12));
}

TEST_CASE("1x1 scan equals a single forward diffraction at the centered origin") {
    const Phantom ph = shepp_logan(32);
    const Probe probe = circular_probe(8, 6);
    SimulateOptions opt;
    opt.geometry = {1, 1, 3};
    const ScanDataset ds = simulate_scan(ph, probe, opt);
    REQUIRE(ds.num_frames() == 1);

    const auto [r0, c0] = scan_window_origin(32, 32, 8, opt.geometry);
    CHECK(r0 == 12);
    CHECK(c0 == 12);
    const Grid<float> expect = forward_diffraction(ph, probe, r0, c0);
    CHECK(std::equal(ds.frames.begin(), ds.frames.end(), expect.flat().begin()));
}

TEST_CASE("free-space scan produces identical frames everywhere") {
    const Phantom ph = free_space(64);
    const Probe probe = circular_probe(10, 7);
    SimulateOptions opt;
    opt.geometry = {4, 4, 5};
    const ScanDataset ds = simulate_scan(ph, probe, opt);
    REQUIRE(ds.num_frames() == 16);
    const auto first = ds.frame_values(0);
    for (std::size_t k = 1; k < 16; ++k) {
        const auto fk = ds.frame_values(k);
        CHECK(std::equal(first.begin(), first.end(), fk.begin()));
    }
}

TEST_CASE("scan positions follow row-major raster order with physical steps") {
    const Phantom ph = free_space(64);
    const Probe probe = circular_probe(8, 8);
    SimulateOptions opt;
    opt.geometry = {3, 5, 4};
    const ScanDataset ds = simulate_scan(ph, probe, opt);
    REQUIRE(ds.num_frames() == 15);
    CHECK(ds.grid_rows == 3);
    CHECK(ds.grid_cols == 5);
    CHECK(ds.step_um == 4.0);
    for (std::size_t k = 1; k <= 15; ++k) {
        const auto& p = ds.positions[k - 1];
        CHECK(p.index == k);
        CHECK(p.row == (k - 1) / 5 + 1);
        CHECK(p.col == (k - 1) % 5 + 1);
        CHECK(p.x_um == p.row * 4.0);
        CHECK(p.y_um == p.col * 4.0);
    }
}

TEST_CASE("absorption dims every frame whose probe disk touches the support") {
    const Phantom ph = shepp_logan(256, 0.3, 0.5);
    const Probe probe = circular_probe(16, 16);
    SimulateOptions opt;
    opt.geometry = {40, 40, 6};
    const ScanDataset ds = simulate_scan(ph, probe, opt);
    REQUIRE(ds.num_frames() == 1600);

    const auto [r0, c0] = scan_window_origin(256, 256, 16, opt.geometry);
    const Phantom empty = free_space(256);
    const double free_total = pattern_sum(forward_diffraction(empty, probe, 0, 0));

    std::size_t overlapping = 0;
    for (const auto& pos : ds.positions) {
        const std::size_t top = r0 + (pos.row - 1) * 6;
        const std::size_t left = c0 + (pos.col - 1) * 6;
        bool touches = false;
        for (std::size_t r = 0; r < 16 && !touches; ++r)
            for (std::size_t c = 0; c < 16; ++c) {
                if (probe.amplitude.at(r, c) == cplx{0.0, 0.0}) continue;
                if (ph.support.at(top + r, left + c)) {
                    touches = true;
                    break;
                }
            }
        const double total = pattern_sum(ds.frame(pos.index - 1));
        if (touches) {
            ++overlapping;
            CHECK(total < free_total * (1.0 - 1e-9));
        } else {
            CHECK(total == doctest::Approx(free_total).epsilon(1e-9));
        }
    }
    CHECK(overlapping > 100);       // the phantom dominates the scanned field
    CHECK(overlapping < 1600);      // but free-space cells exist at the rim
}

TEST_CASE("energy conservation: no frame exceeds the free-space total") {
    const Phantom ph = shepp_logan(96, 0.4, 0.7);
    const Probe probe = circular_probe(12, 10);
    SimulateOptions opt;
    opt.geometry = {8, 8, 10};
    const ScanDataset ds = simulate_scan(ph, probe, opt);
    const double cap = 144.0 * probe.power();
    for (std::size_t k = 0; k < ds.num_frames(); ++k)
        CHECK(pattern_sum(ds.frame(k)) <= cap * (1.0 + 1e-9));
}

TEST_CASE("Poisson noise is seeded, reproducible, and thread-invariant") {
    const Phantom ph = shepp_logan(64);
    const Probe probe = circular_probe(8, 8);
    SimulateOptions opt;
    opt.geometry = {5, 5, 8};
    opt.photons = 5000.0;
    opt.seed = 42;

    const ScanDataset a = simulate_scan(ph, probe, opt);
    const ScanDataset b = simulate_scan(ph, probe, opt);
    CHECK(a.frames == b.frames);

    opt.threads = 3;
    const ScanDataset c = simulate_scan(ph, probe, opt);
    CHECK(a.frames == c.frames);

    opt.threads = 0;
    opt.seed = 43;
    const ScanDataset d = simulate_scan(ph, probe, opt);
    CHECK(a.frames != d.frames);

    SimulateOptions clean = opt;
    clean.photons = 0.0;
    const ScanDataset e = simulate_scan(ph, probe, clean);
    CHECK(a.frames != e.frames);

    // Noisy totals track the noiseless totals at this photon budget.
    for (std::size_t k = 0; k < a.num_frames(); ++k) {
        const double noisy = pattern_sum(a.frame(k));
        const double ideal = pattern_sum(e.frame(k));
        CHECK(noisy == doctest::Approx(ideal).epsilon(0.15));
    }
}

TEST_CASE("raster larger than the phantom is rejected") {
    const Phantom ph = free_space(32);
    const Probe probe = circular_probe(8, 8);
    SimulateOptions opt;
    opt.geometry = {5, 5, 7};  // extent 4*7+8 = 36 > 32
    CHECK_THROWS_AS(simulate_scan(ph, probe, opt), GeometryError);
    opt.geometry = {0, 4, 7};
    CHECK_THROWS_AS(simulate_scan(ph, probe, opt), SizeError);
}
