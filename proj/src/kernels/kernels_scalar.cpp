#include "ptyroi/kernels.hpp"

#include <cmath>

namespace ptyroi::kernels::scalar {

double sum_f32(const float* v, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += static_cast<double>(v[i]);
    return acc;
}

MomentSums moments_f32(const float* v, std::size_t n) {
    double total = 0.0, dot = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = static_cast<double>(v[i]);
        total += x;
        dot += static_cast<double>(i) * x;
    }
    return {total, dot};
}

void abs2_c64_to_f32(const std::complex<double>* s, float* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double re = s[i].real(), im = s[i].imag();
        out[i] = static_cast<float>(re * re + im * im);
    }
}

void cmul_c64(const std::complex<double>* a, const std::complex<double>* b,
              std::complex<double>* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double ar = a[i].real(), ai = a[i].imag();
        const double br = b[i].real(), bi = b[i].imag();
        out[i] = {ar * br - ai * bi, ar * bi + ai * br};
    }
}

void modulus_project_c64(std::complex<double>* s, const float* target, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double re = s[i].real(), im = s[i].imag();
        const double mag = std::sqrt(re * re + im * im);
        const double t = static_cast<double>(target[i]);
        if (mag == 0.0) {
            s[i] = {t, 0.0};
        } else {
            const double k = t / mag;
            s[i] = {re * k, im * k};
        }
    }
}

double modulus_misfit_c64(const std::complex<double>* s, const float* target, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double re = s[i].real(), im = s[i].imag();
        const double d = std::sqrt(re * re + im * im) - static_cast<double>(target[i]);
        acc += d * d;
    }
    return acc;
}

void conj_mac_c64(std::complex<double>* obj, const std::complex<double>* probe,
                  const std::complex<double>* delta, double scale, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double pr = probe[i].real(), pi = probe[i].imag();
        const double dr = delta[i].real(), di = delta[i].imag();
        // conj(p) * d = (pr*dr + pi*di) + i(pr*di - pi*dr)
        obj[i] += std::complex<double>(scale * (pr * dr + pi * di),
                                       scale * (pr * di - pi * dr));
    }
}

}  // namespace ptyroi::kernels::scalar
