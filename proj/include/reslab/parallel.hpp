#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace reslab {

/// Worker count: `requested` when non-zero, else RESIDUAL_LAB_THREADS when set
/// to a positive integer, else the hardware concurrency (at least 1).
unsigned resolve_thread_count(unsigned requested);

/// Calls fn(i) for i in [0, n) on up to `threads` workers. Callers write
/// results into slot i, so output never depends on scheduling. If any call
/// throws, the exception from the lowest failing index is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    if (n == 0) return;
    const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            if (failed.load(std::memory_order_relaxed)) continue;
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
                failed = true;
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers - 1);
        for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(work);
        work();
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace reslab
