#include "ptyroi/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <vector>

namespace ptyroi::fft {

namespace {

struct PlanKey {
    std::size_t rows, cols;
    int sign;
    auto operator<=>(const PlanKey&) const = default;
};

// fftw_execute_dft is thread-safe; plan creation is not.
std::mutex g_plan_mutex;
std::map<PlanKey, fftw_plan>& plan_cache() {
    static std::map<PlanKey, fftw_plan> cache;
    return cache;
}

fftw_plan get_plan(std::size_t rows, std::size_t cols, int sign) {
    std::lock_guard lock(g_plan_mutex);
    auto& cache = plan_cache();
    const PlanKey key{rows, cols, sign};
    if (auto it = cache.find(key); it != cache.end()) return it->second;

    // FFTW_UNALIGNED lets one plan serve any buffer of this shape;
    // FFTW_ESTIMATE keeps the planner deterministic.
    std::vector<fftw_complex> scratch(rows * cols);
    fftw_plan plan = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols),
                                      scratch.data(), scratch.data(), sign,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    cache.emplace(key, plan);
    return plan;
}

}  // namespace

void fft2_inplace(std::complex<double>* data, std::size_t rows, std::size_t cols) {
    fftw_plan plan = get_plan(rows, cols, FFTW_FORWARD);
    auto* buf = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(plan, buf, buf);
}

void ifft2_inplace(std::complex<double>* data, std::size_t rows, std::size_t cols) {
    fftw_plan plan = get_plan(rows, cols, FFTW_BACKWARD);
    auto* buf = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(plan, buf, buf);
    const double norm = 1.0 / (static_cast<double>(rows) * static_cast<double>(cols));
    const std::size_t n = rows * cols;
    for (std::size_t i = 0; i < n; ++i) data[i] *= norm;
}

Grid<std::complex<double>> fft2(const Grid<std::complex<double>>& in) {
    Grid<std::complex<double>> out = in;
    fft2_inplace(out.data(), out.rows(), out.cols());
    return out;
}

Grid<std::complex<double>> ifft2(const Grid<std::complex<double>>& in) {
    Grid<std::complex<double>> out = in;
    ifft2_inplace(out.data(), out.rows(), out.cols());
    return out;
}

}  // namespace ptyroi::fft
