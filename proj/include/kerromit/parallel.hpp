#ifndef KERROMIT_PARALLEL_HPP
#define KERROMIT_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace kerromit
{
// Runs fn(i) for i in [0, n) on up to `jobs` threads. Each index is visited
// exactly once; callers write results into pre-sized slots, so output order
// never depends on scheduling. The first exception thrown is rethrown.
template <class Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn &&fn)
{
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::jthread> pool;
    const auto count = std::min<std::size_t>(jobs, n);
    pool.reserve(count);
    for (std::size_t t = 0; t < count; ++t) pool.emplace_back(worker);
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}
} // namespace kerromit

#endif
