#pragma once

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace vekua {

/// Worker count: hardware concurrency, capped by the VEKUA_THREADS
/// environment variable when set.
inline unsigned worker_count() {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("VEKUA_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(v));
        } catch (...) {
            // ignore malformed values, keep the hardware default
        }
    }
    return n;
}

/// Runs fn(i) for i in [0, count).  Iterations must be independent; the call
/// returns after all complete.  Falls back to a plain loop when only one
/// worker is available or the range is small.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
    const unsigned workers = worker_count();
    if (workers <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const unsigned n = std::min<unsigned>(workers, static_cast<unsigned>(count));
    std::vector<std::thread> pool;
    pool.reserve(n);
    for (unsigned w = 0; w < n; ++w) {
        pool.emplace_back([&, w]() {
            for (std::size_t i = w; i < count; i += n) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace vekua
