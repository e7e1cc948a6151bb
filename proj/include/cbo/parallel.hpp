#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cbo {

inline unsigned resolve_threads(int requested) {
    if (requested > 0) return static_cast<unsigned>(requested);
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

/// Runs body(i) for i in [0, count) split into contiguous chunks, one per
/// thread. The body must only touch state owned by index i (slot pattern);
/// with counter-based draws the result is then independent of the thread
/// count. Exceptions are captured and the first one rethrown.
template <typename Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
    if (count == 0) return;
    if (threads <= 1 || count == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    const unsigned t = std::min<std::size_t>(threads, count);
    std::vector<std::thread> pool;
    pool.reserve(t);
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (unsigned w = 0; w < t; ++w) {
        const std::size_t lo = count * w / t;
        const std::size_t hi = count * (w + 1) / t;
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> g(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace cbo
