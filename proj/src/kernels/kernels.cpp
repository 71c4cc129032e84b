#include "ptyroi/kernels.hpp"

#include "ptyroi/errors.hpp"

#include <cstdio>
#include <cstdlib>
#include <string>

namespace ptyroi::kernels {

namespace {

struct Table {
    Backend backend;
    double (*sum_f32)(const float*, std::size_t);
    MomentSums (*moments_f32)(const float*, std::size_t);
    void (*abs2_c64_to_f32)(const std::complex<double>*, float*, std::size_t);
    void (*cmul_c64)(const std::complex<double>*, const std::complex<double>*,
                     std::complex<double>*, std::size_t);
    void (*modulus_project_c64)(std::complex<double>*, const float*, std::size_t);
    double (*modulus_misfit_c64)(const std::complex<double>*, const float*, std::size_t);
    void (*conj_mac_c64)(std::complex<double>*, const std::complex<double>*,
                         const std::complex<double>*, double, std::size_t);
};

constexpr Table kScalarTable = {
    Backend::scalar,        scalar::sum_f32,
    scalar::moments_f32,    scalar::abs2_c64_to_f32,
    scalar::cmul_c64,       scalar::modulus_project_c64,
    scalar::modulus_misfit_c64, scalar::conj_mac_c64,
};

constexpr Table kAvx2Table = {
    Backend::avx2,          avx2::sum_f32,
    avx2::moments_f32,      avx2::abs2_c64_to_f32,
    avx2::cmul_c64,         avx2::modulus_project_c64,
    avx2::modulus_misfit_c64,   avx2::conj_mac_c64,
};

Table pick_table() {
    bool want_avx2 = avx2_supported();
    if (const char* env = std::getenv("PTYROI_KERNELS")) {
        const std::string v(env);
        if (v == "scalar") {
            want_avx2 = false;
        } else if (v == "avx2") {
            if (avx2_supported()) {
                want_avx2 = true;
            } else {
                std::fprintf(stderr,
                             "warning: PTYROI_KERNELS=avx2 requested but AVX2 is "
                             "unsupported; using scalar kernels\n");
                want_avx2 = false;
            }
        } else {
            std::fprintf(stderr,
                         "warning: unrecognized PTYROI_KERNELS value \"%s\"; "
                         "using the auto-selected backend\n",
                         v.c_str());
        }
    }
    return want_avx2 ? kAvx2Table : kScalarTable;
}

Table g_table = pick_table();

}  // namespace

bool avx2_supported() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend active_backend() { return g_table.backend; }

std::string_view backend_name() {
    return g_table.backend == Backend::avx2 ? "avx2" : "scalar";
}

void force_backend(Backend b) {
    if (b == Backend::avx2 && !avx2_supported())
        throw Error("avx2 kernels not supported on this CPU");
    g_table = b == Backend::avx2 ? kAvx2Table : kScalarTable;
}

double sum_f32(const float* v, std::size_t n) { return g_table.sum_f32(v, n); }

MomentSums moments_f32(const float* v, std::size_t n) { return g_table.moments_f32(v, n); }

void abs2_c64_to_f32(const std::complex<double>* s, float* out, std::size_t n) {
    g_table.abs2_c64_to_f32(s, out, n);
}

void cmul_c64(const std::complex<double>* a, const std::complex<double>* b,
              std::complex<double>* out, std::size_t n) {
    g_table.cmul_c64(a, b, out, n);
}

void modulus_project_c64(std::complex<double>* s, const float* target, std::size_t n) {
    g_table.modulus_project_c64(s, target, n);
}

double modulus_misfit_c64(const std::complex<double>* s, const float* target, std::size_t n) {
    return g_table.modulus_misfit_c64(s, target, n);
}

void conj_mac_c64(std::complex<double>* obj, const std::complex<double>* probe,
                  const std::complex<double>* delta, double scale, std::size_t n) {
    g_table.conj_mac_c64(obj, probe, delta, scale, n);
}

}  // namespace ptyroi::kernels
