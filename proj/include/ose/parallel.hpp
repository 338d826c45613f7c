#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace ose {

/// Counts t in [0, trials) with pred(t) true, using up to `threads` workers
/// on contiguous chunks. The sum is order-free, so the result never depends
/// on the thread count. The first exception thrown by any worker is
/// rethrown.
template <class Pred>
std::uint64_t parallel_count(std::uint64_t trials, unsigned threads, Pred&& pred) {
    threads = std::max(1u, threads);
    if (threads == 1 || trials < 2) {
        std::uint64_t hits = 0;
        for (std::uint64_t t = 0; t < trials; ++t) hits += pred(t) ? 1 : 0;
        return hits;
    }
    const std::uint64_t workers = std::min<std::uint64_t>(threads, trials);
    std::vector<std::uint64_t> partial(workers, 0);
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::uint64_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            const std::uint64_t lo = trials * w / workers;
            const std::uint64_t hi = trials * (w + 1) / workers;
            try {
                for (std::uint64_t t = lo; t < hi; ++t) partial[w] += pred(t) ? 1 : 0;
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    std::uint64_t hits = 0;
    for (auto p : partial) hits += p;
    return hits;
}

}  // namespace ose
