#include "ptyroi/simulator.hpp"

#include "ptyroi/errors.hpp"
#include "ptyroi/fft.hpp"
#include "ptyroi/kernels.hpp"
#include "ptyroi/parallel.hpp"
#include "ptyroi/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace ptyroi {

namespace {

struct Ellipse {
    double intensity;
    double a, b;        // semi-axes along x and y before rotation
    double x0, y0;      // center, phantom coordinates in [-1, 1]
    double theta_deg;   // counterclockwise rotation
};

// Shepp & Logan's original head phantom table.
constexpr Ellipse kSheppLogan[] = {
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

bool inside_ellipse(const Ellipse& e, double x, double y) {
    const double t = e.theta_deg * std::numbers::pi / 180.0;
    const double ct = std::cos(t), st = std::sin(t);
    const double dx = x - e.x0, dy = y - e.y0;
    const double xr = dx * ct + dy * st;
    const double yr = -dx * st + dy * ct;
    return (xr * xr) / (e.a * e.a) + (yr * yr) / (e.b * e.b) <= 1.0;
}

}  // namespace

Phantom shepp_logan(std::size_t n, double alpha, double phi) {
    if (n < 16) throw SizeError("phantom must be at least 16 px");
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw DataError("absorption strength must lie in [0, 1]");
    if (!std::isfinite(phi)) throw DataError("phase strength must be finite");

    Grid<double> intensity(n, n, 0.0);
    Grid<std::uint8_t> support(n, n, 0);
    const double half = static_cast<double>(n) / 2.0;
    double max_intensity = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        const double y = (half - (static_cast<double>(r) + 0.5)) / half;
        for (std::size_t c = 0; c < n; ++c) {
            const double x = ((static_cast<double>(c) + 0.5) - half) / half;
            double sum = 0.0;
            bool inside_any = false;
            for (const auto& e : kSheppLogan) {
                if (inside_ellipse(e, x, y)) {
                    sum += e.intensity;
                    inside_any = true;
                }
            }
            intensity.at(r, c) = sum;
            support.at(r, c) = inside_any ? 1 : 0;
            max_intensity = std::max(max_intensity, sum);
        }
    }
    if (max_intensity <= 0.0) throw SizeError("phantom raster too coarse");

    Phantom ph;
    ph.support = std::move(support);
    ph.transmission = Grid<std::complex<double>>(n, n);
    for (std::size_t i = 0; i < intensity.size(); ++i) {
        const double v = intensity.flat()[i] / max_intensity;
        ph.transmission.flat()[i] = std::polar(1.0 - alpha * v, phi * v);
    }
    return ph;
}

double Probe::power() const {
    double total = 0.0;
    for (const auto& a : amplitude.flat()) total += std::norm(a);
    return total;
}

double Probe::max_abs2() const {
    double best = 0.0;
    for (const auto& a : amplitude.flat()) best = std::max(best, std::norm(a));
    return best;
}

Probe circular_probe(std::size_t p, std::size_t diameter_px) {
    if (diameter_px < 1 || diameter_px > p)
        throw SizeError("probe diameter must lie in [1, p]");
    Probe probe;
    probe.diameter_px = diameter_px;
    probe.amplitude = Grid<std::complex<double>>(p, p, {0.0, 0.0});
    const double center = (static_cast<double>(p) - 1.0) / 2.0;
    const double radius = static_cast<double>(diameter_px) / 2.0;
    for (std::size_t r = 0; r < p; ++r) {
        for (std::size_t c = 0; c < p; ++c) {
            const double dr = static_cast<double>(r) - center;
            const double dc = static_cast<double>(c) - center;
            if (dr * dr + dc * dc <= radius * radius)
                probe.amplitude.at(r, c) = {1.0, 0.0};
        }
    }
    return probe;
}

namespace {

// Exit-wave spectrum magnitudes squared, written into `pattern` (unshifted).
void forward_into(const Phantom& obj, const Probe& probe, std::size_t top_row,
                  std::size_t top_col, std::vector<std::complex<double>>& work,
                  float* pattern) {
    const std::size_t p = probe.amplitude.rows();
    if (top_row + p > obj.transmission.rows() || top_col + p > obj.transmission.cols())
        throw GeometryError("probe window outside phantom");
    work.resize(p * p);
    for (std::size_t r = 0; r < p; ++r) {
        kernels::cmul_c64(probe.amplitude.row(r).data(),
                          &obj.transmission.at(top_row + r, top_col), work.data() + r * p, p);
    }
    fft::fft2_inplace(work.data(), p, p);
    kernels::abs2_c64_to_f32(work.data(), pattern, p * p);
}

}  // namespace

Grid<float> forward_diffraction(const Phantom& obj, const Probe& probe,
                                std::size_t top_row, std::size_t top_col) {
    const std::size_t p = probe.amplitude.rows();
    Grid<float> pattern(p, p);
    std::vector<std::complex<double>> work;
    forward_into(obj, probe, top_row, top_col, work, pattern.data());
    return fft::fftshift(pattern);
}

std::array<std::size_t, 2> scan_window_origin(std::size_t phantom_rows,
                                              std::size_t phantom_cols,
                                              std::size_t probe_px, const ScanGeometry& g) {
    const std::size_t extent_r = (g.grid_rows - 1) * g.step_px + probe_px;
    const std::size_t extent_c = (g.grid_cols - 1) * g.step_px + probe_px;
    if (extent_r > phantom_rows || extent_c > phantom_cols)
        throw GeometryError("scan raster does not fit inside the phantom");
    return {(phantom_rows - extent_r) / 2, (phantom_cols - extent_c) / 2};
}

ScanDataset simulate_scan(const Phantom& obj, const Probe& probe,
                          const SimulateOptions& opt) {
    const ScanGeometry& g = opt.geometry;
    if (g.grid_rows < 1 || g.grid_cols < 1 || g.step_px < 1)
        throw SizeError("scan grid and step must be >= 1");
    if (!std::isfinite(opt.photons) || opt.photons < 0.0)
        throw DataError("photons must be finite and >= 0");
    const std::size_t p = probe.amplitude.rows();
    const auto [origin_r, origin_c] =
        scan_window_origin(obj.transmission.rows(), obj.transmission.cols(), p, g);

    ScanDataset ds;
    ds.frame_rows = p;
    ds.frame_cols = p;
    ds.grid_rows = g.grid_rows;
    ds.grid_cols = g.grid_cols;
    ds.step_um = static_cast<double>(g.step_px);
    const std::size_t k_total = g.grid_rows * g.grid_cols;
    ds.frames.resize(k_total * p * p);
    ds.positions.resize(k_total);

    // Photon budget: `photons` is the expected free-space frame total, so the
    // per-pixel rate is photons * I / (p^2 * probe power) by Parseval.
    const double rate_scale =
        opt.photons > 0.0
            ? opt.photons / (static_cast<double>(p * p) * probe.power())
            : 0.0;

    parallel_for(k_total, opt.threads, [&](std::size_t begin, std::size_t end) {
        std::vector<std::complex<double>> work;
        Grid<float> raw(p, p);
        for (std::size_t k = begin; k < end; ++k) {
            const std::size_t row = k / g.grid_cols;
            const std::size_t col = k % g.grid_cols;
            auto& pos = ds.positions[k];
            pos.index = static_cast<std::uint32_t>(k + 1);
            pos.row = static_cast<std::uint32_t>(row + 1);
            pos.col = static_cast<std::uint32_t>(col + 1);
            pos.x_um = static_cast<double>(pos.row) * ds.step_um;
            pos.y_um = static_cast<double>(pos.col) * ds.step_um;

            float* out = ds.frames.data() + k * p * p;
            forward_into(obj, probe, origin_r + row * g.step_px,
                         origin_c + col * g.step_px, work, raw.data());
            const Grid<float> shifted = fft::fftshift(raw);
            std::copy(shifted.flat().begin(), shifted.flat().end(), out);

            if (rate_scale > 0.0) {
                SplitMix64 rng = substream(opt.seed, k);
                for (std::size_t i = 0; i < p * p; ++i) {
                    const double mean = rate_scale * static_cast<double>(out[i]);
                    out[i] = static_cast<float>(
                        static_cast<double>(poisson(rng, mean)) / rate_scale);
                }
            }
        }
    });
    return ds;
}

}  // namespace ptyroi
