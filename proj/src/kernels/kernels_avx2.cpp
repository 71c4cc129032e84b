// AVX2/FMA variants. This translation unit is compiled with -mavx2 -mfma;
// nothing here may run unless dispatch confirmed CPU support.

#include "ptyroi/kernels.hpp"

#include <immintrin.h>

#include <cmath>
#include <cstring>

namespace ptyroi::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

// (t0, t1) as doubles from two consecutive floats.
inline __m128d load2f_as_pd(const float* t) {
    __m128i bits = _mm_loadl_epi64(reinterpret_cast<const __m128i*>(t));
    return _mm_cvtps_pd(_mm_castsi128_ps(bits));
}

// (x0, x0, x1, x1)
inline __m256d dup_pairs(__m128d x) {
    return _mm256_permute4x64_pd(_mm256_castpd128_pd256(x), 0x50);
}

// |s|^2 per complex, duplicated: (m0, m0, m1, m1) for two packed complex.
inline __m256d mag2_dup(__m256d s) {
    __m256d sq = _mm256_mul_pd(s, s);
    return _mm256_hadd_pd(sq, sq);
}

}  // namespace

double sum_f32(const float* v, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 f = _mm256_loadu_ps(v + i);
        acc0 = _mm256_add_pd(acc0, _mm256_cvtps_pd(_mm256_castps256_ps128(f)));
        acc1 = _mm256_add_pd(acc1, _mm256_cvtps_pd(_mm256_extractf128_ps(f, 1)));
    }
    double total = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) total += static_cast<double>(v[i]);
    return total;
}

MomentSums moments_f32(const float* v, std::size_t n) {
    __m256d sum0 = _mm256_setzero_pd(), sum1 = _mm256_setzero_pd();
    __m256d dot0 = _mm256_setzero_pd(), dot1 = _mm256_setzero_pd();
    __m256d idx0 = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
    __m256d idx1 = _mm256_set_pd(7.0, 6.0, 5.0, 4.0);
    const __m256d step = _mm256_set1_pd(8.0);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 f = _mm256_loadu_ps(v + i);
        __m256d lo = _mm256_cvtps_pd(_mm256_castps256_ps128(f));
        __m256d hi = _mm256_cvtps_pd(_mm256_extractf128_ps(f, 1));
        sum0 = _mm256_add_pd(sum0, lo);
        sum1 = _mm256_add_pd(sum1, hi);
        dot0 = _mm256_fmadd_pd(idx0, lo, dot0);
        dot1 = _mm256_fmadd_pd(idx1, hi, dot1);
        idx0 = _mm256_add_pd(idx0, step);
        idx1 = _mm256_add_pd(idx1, step);
    }
    double total = hsum(_mm256_add_pd(sum0, sum1));
    double dot = hsum(_mm256_add_pd(dot0, dot1));
    for (; i < n; ++i) {
        const double x = static_cast<double>(v[i]);
        total += x;
        dot += static_cast<double>(i) * x;
    }
    return {total, dot};
}

void abs2_c64_to_f32(const std::complex<double>* s, float* out, std::size_t n) {
    const double* p = reinterpret_cast<const double*>(s);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d m = mag2_dup(_mm256_loadu_pd(p + 2 * i));
        __m128d pair = _mm_unpacklo_pd(_mm256_castpd256_pd128(m), _mm256_extractf128_pd(m, 1));
        __m128 f = _mm_cvtpd_ps(pair);
        _mm_storel_epi64(reinterpret_cast<__m128i*>(out + i), _mm_castps_si128(f));
    }
    for (; i < n; ++i) {
        const double re = s[i].real(), im = s[i].imag();
        out[i] = static_cast<float>(re * re + im * im);
    }
}

void cmul_c64(const std::complex<double>* a, const std::complex<double>* b,
              std::complex<double>* out, std::size_t n) {
    const double* pa = reinterpret_cast<const double*>(a);
    const double* pb = reinterpret_cast<const double*>(b);
    double* po = reinterpret_cast<double*>(out);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d va = _mm256_loadu_pd(pa + 2 * i);
        __m256d vb = _mm256_loadu_pd(pb + 2 * i);
        __m256d ar = _mm256_movedup_pd(va);          // (ar, ar)
        __m256d ai = _mm256_permute_pd(va, 0xF);     // (ai, ai)
        __m256d bs = _mm256_permute_pd(vb, 0x5);     // (bi, br)
        // even: ar*br - ai*bi, odd: ar*bi + ai*br
        __m256d res = _mm256_fmaddsub_pd(ar, vb, _mm256_mul_pd(ai, bs));
        _mm256_storeu_pd(po + 2 * i, res);
    }
    for (; i < n; ++i) {
        const double ar = a[i].real(), ai = a[i].imag();
        const double br = b[i].real(), bi = b[i].imag();
        out[i] = {ar * br - ai * bi, ar * bi + ai * br};
    }
}

void modulus_project_c64(std::complex<double>* s, const float* target, std::size_t n) {
    double* p = reinterpret_cast<double*>(s);
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d v = _mm256_loadu_pd(p + 2 * i);
        __m256d m2 = mag2_dup(v);
        __m256d tb = dup_pairs(load2f_as_pd(target + i));
        __m256d scale = _mm256_div_pd(tb, _mm256_sqrt_pd(m2));
        __m256d res = _mm256_mul_pd(v, scale);
        __m256d iszero = _mm256_cmp_pd(m2, zero, _CMP_EQ_OQ);
        __m256d repl = _mm256_blend_pd(tb, zero, 0xA);  // (t0, 0, t1, 0)
        res = _mm256_blendv_pd(res, repl, iszero);
        _mm256_storeu_pd(p + 2 * i, res);
    }
    for (; i < n; ++i) {
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
    const double* p = reinterpret_cast<const double*>(s);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d m = _mm256_sqrt_pd(mag2_dup(_mm256_loadu_pd(p + 2 * i)));
        __m256d tb = dup_pairs(load2f_as_pd(target + i));
        __m256d d = _mm256_sub_pd(m, tb);
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    // every complex contributed its squared difference to two lanes
    double total = 0.5 * hsum(acc);
    for (; i < n; ++i) {
        const double re = s[i].real(), im = s[i].imag();
        const double d = std::sqrt(re * re + im * im) - static_cast<double>(target[i]);
        total += d * d;
    }
    return total;
}

void conj_mac_c64(std::complex<double>* obj, const std::complex<double>* probe,
                  const std::complex<double>* delta, double scale, std::size_t n) {
    double* po = reinterpret_cast<double*>(obj);
    const double* pp = reinterpret_cast<const double*>(probe);
    const double* pd = reinterpret_cast<const double*>(delta);
    const __m256d vs = _mm256_set1_pd(scale);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d vp = _mm256_loadu_pd(pp + 2 * i);
        __m256d vd = _mm256_loadu_pd(pd + 2 * i);
        __m256d pr = _mm256_movedup_pd(vp);       // (pr, pr)
        __m256d pi = _mm256_permute_pd(vp, 0xF);  // (pi, pi)
        __m256d ds = _mm256_permute_pd(vd, 0x5);  // (di, dr)
        // even: pr*dr + pi*di, odd: pr*di - pi*dr
        __m256d cm = _mm256_fmsubadd_pd(pr, vd, _mm256_mul_pd(pi, ds));
        __m256d vo = _mm256_loadu_pd(po + 2 * i);
        _mm256_storeu_pd(po + 2 * i, _mm256_fmadd_pd(vs, cm, vo));
    }
    for (; i < n; ++i) {
        const double pr = probe[i].real(), pim = probe[i].imag();
        const double dr = delta[i].real(), di = delta[i].imag();
        obj[i] += std::complex<double>(scale * (pr * dr + pim * di),
                                       scale * (pr * di - pim * dr));
    }
}

}  // namespace ptyroi::kernels::avx2
