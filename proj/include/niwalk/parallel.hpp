#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace niwalk {

inline unsigned effective_threads(unsigned requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

/// Runs fn(index) for index in [begin, end) on a worker pool. fn must write
/// its result into caller-owned per-index storage; results are then
/// independent of scheduling.
template <class Fn>
void parallel_for_index(std::uint64_t begin, std::uint64_t end, unsigned threads,
                        Fn&& fn) {
    threads = effective_threads(threads);
    if (threads <= 1 || end - begin <= 1) {
        for (std::uint64_t i = begin; i < end; ++i) fn(i);
        return;
    }
    std::atomic<std::uint64_t> next{begin};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    std::mutex error_mutex;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                std::uint64_t i = next.fetch_add(1);
                if (i >= end || failed.load(std::memory_order_relaxed)) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!failed.exchange(true)) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failed) std::rethrow_exception(error);
}

}  // namespace niwalk
