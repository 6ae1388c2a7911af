#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <span>
#include <thread>
#include <vector>

namespace longrun {

/// Worker count: LONGRUN_THREADS if set to a positive integer, otherwise the
/// hardware concurrency.
std::size_t thread_count();

/// Calls body(begin, end) on contiguous blocks of [0, n), one block per
/// worker. Bodies write results indexed by path, so the outcome never
/// depends on the number of workers. The first exception is rethrown.
template <class Body>
void parallel_blocks(std::size_t n, Body&& body) {
    const std::size_t workers = std::max<std::size_t>(1, std::min(thread_count(), n));
    if (workers == 1) {
        body(std::size_t{0}, n);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = n * w / workers;
        const std::size_t hi = n * (w + 1) / workers;
        pool.emplace_back([&, w, lo, hi] {
            try {
                body(lo, hi);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

/// Fixed-order pairwise summation.
double pairwise_sum(std::span<const double> v);

}  // namespace longrun
