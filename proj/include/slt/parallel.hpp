#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace slt {

// Run fn(i) for i in [0, n) on the given number of workers and return the
// results in index order, so reductions are bitwise independent of the
// worker count and of scheduling.
template <typename T, typename F>
std::vector<T> parallel_map_indexed(std::size_t n, unsigned threads, const F& fn) {
    std::vector<T> out(n);
    if (n == 0) return out;
    if (threads <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                out[i] = fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const unsigned count = std::min<unsigned>(threads, static_cast<unsigned>(n));
    pool.reserve(count);
    for (unsigned w = 0; w < count; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
    return out;
}

} // namespace slt
