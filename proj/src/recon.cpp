#include "ptyroi/recon.hpp"

#include "ptyroi/errors.hpp"
#include "ptyroi/fft.hpp"
#include "ptyroi/kernels.hpp"
#include "ptyroi/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <vector>

namespace ptyroi {

namespace {

std::size_t integral_step_px(double step_um) {
    const double rounded = std::round(step_um);
    if (!(rounded >= 1.0) || std::abs(step_um - rounded) > 1e-9)
        throw GeometryError("scan step is not a positive integral pixel count");
    return static_cast<std::size_t>(rounded);
}

}  // namespace

ReconImage epie_reconstruct(const ScanDataset& ds, const Probe& probe,
                            const EpieOptions& opt) {
    if (ds.num_frames() == 0) throw SizeError("cannot reconstruct from an empty dataset");
    const std::size_t p = probe.amplitude.rows();
    if (probe.amplitude.cols() != p || ds.frame_rows != p || ds.frame_cols != p)
        throw GeometryError("probe and pattern dimensions must match and be square");
    if (opt.iterations < 1) throw SizeError("iteration count must be >= 1");

    const std::size_t step = integral_step_px(ds.step_um);
    const std::size_t obj_rows = (ds.grid_rows - 1) * step + p;
    const std::size_t obj_cols = (ds.grid_cols - 1) * step + p;
    const std::size_t k_total = ds.num_frames();
    const std::size_t fs = p * p;

    // Modulus targets: ifftshifted sqrt(pattern), matching the simulator's
    // centered-FFT convention.
    std::vector<float> targets(k_total * fs);
    {
        Grid<float> tmp(p, p);
        for (std::size_t k = 0; k < k_total; ++k) {
            const auto src = ds.frame_values(k);
            for (std::size_t i = 0; i < fs; ++i) tmp.flat()[i] = std::sqrt(src[i]);
            const Grid<float> shifted = fft::ifftshift(tmp);
            std::copy(shifted.flat().begin(), shifted.flat().end(),
                      targets.data() + k * fs);
        }
    }

    ReconImage rec;
    rec.object_estimate = Grid<std::complex<double>>(obj_rows, obj_cols, {1.0, 0.0});
    rec.iterations = opt.iterations;
    rec.error_trace.reserve(opt.iterations);

    const double scale = opt.object_step / probe.max_abs2();
    std::vector<std::size_t> order(k_total);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<std::complex<double>> psi(fs), spectrum(fs);

    for (int iter = 0; iter < opt.iterations; ++iter) {
        SplitMix64 rng = substream(opt.seed, static_cast<std::uint64_t>(iter));
        for (std::size_t i = k_total; i > 1; --i)
            std::swap(order[i - 1], order[rng.bounded(i)]);

        double misfit = 0.0;
        for (const std::size_t k : order) {
            const auto& pos = ds.positions[k];
            const std::size_t top_r = (pos.row - 1) * step;
            const std::size_t top_c = (pos.col - 1) * step;
            const float* target = targets.data() + k * fs;

            for (std::size_t r = 0; r < p; ++r) {
                kernels::cmul_c64(probe.amplitude.row(r).data(),
                                  &rec.object_estimate.at(top_r + r, top_c),
                                  psi.data() + r * p, p);
            }
            spectrum.assign(psi.begin(), psi.end());
            fft::fft2_inplace(spectrum.data(), p, p);
            misfit += kernels::modulus_misfit_c64(spectrum.data(), target, fs);
            kernels::modulus_project_c64(spectrum.data(), target, fs);
            fft::ifft2_inplace(spectrum.data(), p, p);

            for (std::size_t i = 0; i < fs; ++i) spectrum[i] -= psi[i];
            for (std::size_t r = 0; r < p; ++r) {
                kernels::conj_mac_c64(&rec.object_estimate.at(top_r + r, top_c),
                                      probe.amplitude.row(r).data(),
                                      spectrum.data() + r * p, scale, p);
            }
        }
        rec.error_trace.push_back(misfit / static_cast<double>(k_total * fs));
    }
    return rec;
}

Grid<double> phase_image(const ReconImage& r) {
    Grid<double> out(r.object_estimate.rows(), r.object_estimate.cols());
    for (std::size_t i = 0; i < out.size(); ++i)
        out.flat()[i] = std::arg(r.object_estimate.flat()[i]);
    return out;
}

Grid<double> modulus_image(const ReconImage& r) {
    Grid<double> out(r.object_estimate.rows(), r.object_estimate.cols());
    for (std::size_t i = 0; i < out.size(); ++i)
        out.flat()[i] = std::abs(r.object_estimate.flat()[i]);
    return out;
}

Grid<std::complex<double>> align_global_phase(const Grid<std::complex<double>>& img,
                                              const Grid<std::complex<double>>& ref) {
    if (!img.same_shape(ref)) throw GeometryError("phase alignment: shape mismatch");
    std::complex<double> overlap{0.0, 0.0};
    for (std::size_t i = 0; i < img.size(); ++i)
        overlap += img.flat()[i] * std::conj(ref.flat()[i]);
    if (overlap == std::complex<double>{0.0, 0.0}) return img;
    const std::complex<double> rotation = std::polar(1.0, -std::arg(overlap));
    Grid<std::complex<double>> out = img;
    for (auto& v : out.flat()) v *= rotation;
    return out;
}

namespace {

constexpr std::size_t kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kK1 = 0.01;
constexpr double kK2 = 0.03;

const std::array<double, kWindow * kWindow>& gaussian_window() {
    static const auto window = [] {
        std::array<double, kWindow * kWindow> w{};
        const double center = (kWindow - 1) / 2.0;
        double total = 0.0;
        for (std::size_t r = 0; r < kWindow; ++r) {
            for (std::size_t c = 0; c < kWindow; ++c) {
                const double dr = static_cast<double>(r) - center;
                const double dc = static_cast<double>(c) - center;
                const double g = std::exp(-(dr * dr + dc * dc) / (2.0 * kSigma * kSigma));
                w[r * kWindow + c] = g;
                total += g;
            }
        }
        for (auto& v : w) v /= total;
        return w;
    }();
    return window;
}

}  // namespace

double ssim(const Grid<double>& a, const Grid<double>& b) {
    if (!a.same_shape(b)) throw GeometryError("ssim: image dimensions differ");
    if (a.rows() < kWindow || a.cols() < kWindow)
        throw GeometryError("ssim: images must be at least 11x11");

    double lo = a.flat()[0], hi = a.flat()[0];
    for (const double v : a.flat()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    for (const double v : b.flat()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double range = hi - lo;
    if (range == 0.0) return 1.0;
    const double c1 = (kK1 * range) * (kK1 * range);
    const double c2 = (kK2 * range) * (kK2 * range);

    const auto& w = gaussian_window();
    const std::size_t row_stops = a.rows() - kWindow + 1;
    const std::size_t col_stops = a.cols() - kWindow + 1;
    double total = 0.0;
    for (std::size_t r0 = 0; r0 < row_stops; ++r0) {
        for (std::size_t c0 = 0; c0 < col_stops; ++c0) {
            double mu_a = 0.0, mu_b = 0.0;
            for (std::size_t r = 0; r < kWindow; ++r) {
                for (std::size_t c = 0; c < kWindow; ++c) {
                    const double weight = w[r * kWindow + c];
                    mu_a += weight * a.at(r0 + r, c0 + c);
                    mu_b += weight * b.at(r0 + r, c0 + c);
                }
            }
            double var_a = 0.0, var_b = 0.0, cov = 0.0;
            for (std::size_t r = 0; r < kWindow; ++r) {
                for (std::size_t c = 0; c < kWindow; ++c) {
                    const double weight = w[r * kWindow + c];
                    const double da = a.at(r0 + r, c0 + c) - mu_a;
                    const double db = b.at(r0 + r, c0 + c) - mu_b;
                    var_a += weight * da * da;
                    var_b += weight * db * db;
                    cov += weight * da * db;
                }
            }
            total += ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
                     ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
        }
    }
    return total / static_cast<double>(row_stops * col_stops);
}

CropRect support_bbox(const Grid<std::uint8_t>& support) {
    std::size_t r0 = support.rows(), r1 = 0, c0 = support.cols(), c1 = 0;
    bool any = false;
    for (std::size_t r = 0; r < support.rows(); ++r) {
        for (std::size_t c = 0; c < support.cols(); ++c) {
            if (!support.at(r, c)) continue;
            any = true;
            r0 = std::min(r0, r);
            r1 = std::max(r1, r);
            c0 = std::min(c0, c);
            c1 = std::max(c1, c);
        }
    }
    if (!any) throw SizeError("support mask is empty");
    return {r0, c0, r1 - r0 + 1, c1 - c0 + 1};
}

}  // namespace ptyroi
