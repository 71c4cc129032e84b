#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace ptyroi {

inline unsigned resolve_threads(int requested) {
    if (requested > 0) return static_cast<unsigned>(requested);
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

/// Runs fn(begin, end) over static contiguous chunks of [0, n). Chunking
/// depends only on (n, threads), so workers writing disjoint output slots
/// produce scheduling-independent results. The first worker exception is
/// rethrown after all threads join.
inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t, std::size_t)>& fn) {
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), n));
    if (n == 0) return;
    if (workers <= 1) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        pool.emplace_back([&, w, begin, end] {
            try {
                if (begin < end) fn(begin, end);
            } catch (...) {
                errs[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

}  // namespace ptyroi
