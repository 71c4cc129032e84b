#include "ptyroi/errors.hpp"
#include "ptyroi/kernels.hpp"
#include "ptyroi/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

using namespace ptyroi;
using namespace ptyroi::kernels;
using cplx = std::complex<double>;

namespace {

const std::vector<std::size_t> kSizes = {0,  1,  2,  3,  4,  5,   6,   7,  8,
                                         9,  15, 16, 17, 31, 32,  33,  63, 64,
                                         65, 66, 67, 100, 255, 1029};

std::vector<float> random_f32(std::size_t n, std::uint64_t seed, float lo, float hi) {
    SplitMix64 rng(seed);
    std::vector<float> v(n);
    for (auto& x : v) x = lo + static_cast<float>(rng.uniform()) * (hi - lo);
    return v;
}

std::vector<cplx> random_c64(std::size_t n, std::uint64_t seed, double scale) {
    SplitMix64 rng(seed);
    std::vector<cplx> v(n);
    for (auto& x : v)
        x = {(rng.uniform() * 2.0 - 1.0) * scale, (rng.uniform() * 2.0 - 1.0) * scale};
    return v;
}

void check_close(double a, double b, double rel = 1e-12) {
    const double scale = std::max({std::abs(a), std::abs(b), 1.0});
    CHECK(std::abs(a - b) <= rel * scale);
}

void check_close(cplx a, cplx b, double rel = 1e-12) {
    check_close(a.real(), b.real(), rel);
    check_close(a.imag(), b.imag(), rel);
}

}  // namespace

TEST_CASE("sum_f32 backends agree and match a compensated reference") {
    for (std::size_t n : kSizes) {
        const auto v = random_f32(n, 11 + n, -3.0f, 5.0f);
        const double s = scalar::sum_f32(v.data(), n);

        double acc = 0.0;
        for (float x : v) acc += static_cast<double>(x);
        check_close(s, acc);

        if (avx2_supported()) check_close(s, avx2::sum_f32(v.data(), n));
    }
}

TEST_CASE("moments_f32 backends agree and match direct accumulation") {
    for (std::size_t n : kSizes) {
        const auto v = random_f32(n, 23 + n, 0.0f, 7.0f);
        const MomentSums m = scalar::moments_f32(v.data(), n);

        double total = 0.0, dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            total += static_cast<double>(v[i]);
            dot += static_cast<double>(i) * static_cast<double>(v[i]);
        }
        check_close(m.total, total);
        check_close(m.idx_dot, dot);

        if (avx2_supported()) {
            const MomentSums a = avx2::moments_f32(v.data(), n);
            check_close(m.total, a.total);
            check_close(m.idx_dot, a.idx_dot);
        }
    }
}

TEST_CASE("abs2_c64_to_f32 backends agree") {
    for (std::size_t n : kSizes) {
        const auto s = random_c64(n, 37 + n, 4.0);
        std::vector<float> ref(n, -1.0f), vec(n, -1.0f);
        scalar::abs2_c64_to_f32(s.data(), ref.data(), n);
        for (std::size_t i = 0; i < n; ++i)
            check_close(static_cast<double>(ref[i]), std::norm(s[i]), 1e-6);
        if (avx2_supported()) {
            avx2::abs2_c64_to_f32(s.data(), vec.data(), n);
            for (std::size_t i = 0; i < n; ++i) CHECK(ref[i] == vec[i]);
        }
    }
}

TEST_CASE("cmul_c64 backends agree and match operator*") {
    for (std::size_t n : kSizes) {
        const auto a = random_c64(n, 41 + n, 2.0);
        const auto b = random_c64(n, 43 + n, 3.0);
        std::vector<cplx> ref(n), vec(n);
        scalar::cmul_c64(a.data(), b.data(), ref.data(), n);
        for (std::size_t i = 0; i < n; ++i) check_close(ref[i], a[i] * b[i]);
        if (avx2_supported()) {
            avx2::cmul_c64(a.data(), b.data(), vec.data(), n);
            for (std::size_t i = 0; i < n; ++i) check_close(ref[i], vec[i]);
        }
    }
}

TEST_CASE("modulus_project_c64 backends agree, preserve phase, handle zeros") {
    for (std::size_t n : kSizes) {
        auto ref = random_c64(n, 53 + n, 2.0);
        if (n > 2) ref[n / 2] = {0.0, 0.0};  // exercise the zero-modulus branch
        auto vec = ref;
        const auto target = random_f32(n, 59 + n, 0.0f, 9.0f);

        scalar::modulus_project_c64(ref.data(), target.data(), n);
        for (std::size_t i = 0; i < n; ++i)
            check_close(std::abs(ref[i]), static_cast<double>(target[i]), 1e-9);
        if (n > 2) {
            CHECK(ref[n / 2].real() == doctest::Approx(target[n / 2]).epsilon(1e-12));
            CHECK(ref[n / 2].imag() == 0.0);
        }

        if (avx2_supported()) {
            avx2::modulus_project_c64(vec.data(), target.data(), n);
            for (std::size_t i = 0; i < n; ++i) check_close(ref[i], vec[i]);
        }
    }
}

TEST_CASE("modulus_misfit_c64 backends agree and match direct form") {
    for (std::size_t n : kSizes) {
        const auto s = random_c64(n, 61 + n, 3.0);
        const auto target = random_f32(n, 67 + n, 0.0f, 4.0f);
        const double ref = scalar::modulus_misfit_c64(s.data(), target.data(), n);

        double direct = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = std::abs(s[i]) - static_cast<double>(target[i]);
            direct += d * d;
        }
        check_close(ref, direct, 1e-11);

        if (avx2_supported())
            check_close(ref, avx2::modulus_misfit_c64(s.data(), target.data(), n), 1e-11);
    }
}

TEST_CASE("conj_mac_c64 backends agree and match the update formula") {
    for (std::size_t n : kSizes) {
        const auto probe = random_c64(n, 71 + n, 1.5);
        const auto delta = random_c64(n, 73 + n, 2.5);
        auto ref = random_c64(n, 79 + n, 1.0);
        auto vec = ref;
        const double scale = 0.37;

        auto expected = ref;
        for (std::size_t i = 0; i < n; ++i)
            expected[i] += scale * std::conj(probe[i]) * delta[i];

        scalar::conj_mac_c64(ref.data(), probe.data(), delta.data(), scale, n);
        for (std::size_t i = 0; i < n; ++i) check_close(ref[i], expected[i]);

        if (avx2_supported()) {
            avx2::conj_mac_c64(vec.data(), probe.data(), delta.data(), scale, n);
            for (std::size_t i = 0; i < n; ++i) check_close(ref[i], vec[i]);
        }
    }
}

TEST_CASE("dispatch table can be pinned to each available backend") {
    const Backend initial = active_backend();

    force_backend(Backend::scalar);
    CHECK(active_backend() == Backend::scalar);
    CHECK(backend_name() == "scalar");

    const float v[4] = {1.0f, 2.0f, 3.0f, 4.0f};
    CHECK(kernels::sum_f32(v, 4) == 10.0);

    if (avx2_supported()) {
        force_backend(Backend::avx2);
        CHECK(active_backend() == Backend::avx2);
        CHECK(backend_name() == "avx2");
        CHECK(kernels::sum_f32(v, 4) == 10.0);
    } else {
        CHECK_THROWS_AS(force_backend(Backend::avx2), Error);
    }

    force_backend(initial);
}
