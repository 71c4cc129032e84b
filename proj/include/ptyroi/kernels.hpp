#pragma once

#include <complex>
#include <cstddef>
#include <string_view>

// Data-parallel inner loops used by the statistics and reconstruction paths.
// Each kernel has a scalar reference implementation and an AVX2 variant; the
// active backend is chosen once at startup from CPU capabilities and can be
// pinned through force_backend() or the PTYROI_KERNELS environment variable
// ("scalar" or "avx2"). All kernels accumulate in double precision, so the
// two backends agree to reduction-reassociation rounding only.

namespace ptyroi::kernels {

struct MomentSums {
    double total;    // sum of values
    double idx_dot;  // sum of i * value, i zero-based
};

enum class Backend { scalar, avx2 };

Backend active_backend();
std::string_view backend_name();
bool avx2_supported();

/// Pin the dispatch table to one backend. Throws if the backend is not
/// available on this CPU.
void force_backend(Backend b);

double sum_f32(const float* v, std::size_t n);
MomentSums moments_f32(const float* v, std::size_t n);

/// out[i] = |s[i]|^2, cast to float.
void abs2_c64_to_f32(const std::complex<double>* s, float* out, std::size_t n);

/// out[i] = a[i] * b[i].
void cmul_c64(const std::complex<double>* a, const std::complex<double>* b,
              std::complex<double>* out, std::size_t n);

/// s[i] *= target[i] / |s[i]|; a zero-modulus sample becomes target[i] + 0i.
void modulus_project_c64(std::complex<double>* s, const float* target, std::size_t n);

/// Returns sum of (|s[i]| - target[i])^2.
double modulus_misfit_c64(const std::complex<double>* s, const float* target, std::size_t n);

/// obj[i] += scale * conj(probe[i]) * delta[i].
void conj_mac_c64(std::complex<double>* obj, const std::complex<double>* probe,
                  const std::complex<double>* delta, double scale, std::size_t n);

// Reference and vector implementations, exposed so equivalence tests can
// call both sides directly regardless of the dispatch choice.
namespace scalar {
double sum_f32(const float* v, std::size_t n);
MomentSums moments_f32(const float* v, std::size_t n);
void abs2_c64_to_f32(const std::complex<double>* s, float* out, std::size_t n);
void cmul_c64(const std::complex<double>* a, const std::complex<double>* b,
              std::complex<double>* out, std::size_t n);
void modulus_project_c64(std::complex<double>* s, const float* target, std::size_t n);
double modulus_misfit_c64(const std::complex<double>* s, const float* target, std::size_t n);
void conj_mac_c64(std::complex<double>* obj, const std::complex<double>* probe,
                  const std::complex<double>* delta, double scale, std::size_t n);
}  // namespace scalar

namespace avx2 {
double sum_f32(const float* v, std::size_t n);
MomentSums moments_f32(const float* v, std::size_t n);
void abs2_c64_to_f32(const std::complex<double>* s, float* out, std::size_t n);
void cmul_c64(const std::complex<double>* a, const std::complex<double>* b,
              std::complex<double>* out, std::size_t n);
void modulus_project_c64(std::complex<double>* s, const float* target, std::size_t n);
double modulus_misfit_c64(const std::complex<double>* s, const float* target, std::size_t n);
void conj_mac_c64(std::complex<double>* obj, const std::complex<double>* probe,
                  const std::complex<double>* delta, double scale, std::size_t n);
}  // namespace avx2

}  // namespace ptyroi::kernels
