#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <span>
#include <thread>
#include <vector>

namespace mlsc {

inline int resolve_workers(int workers) {
    if (workers > 0) return workers;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Run fn(i) for i in [0, count) on a small thread pool.  Results must be
/// written to disjoint slots; the first exception is rethrown.
inline void parallel_for(long long count, int workers, const std::function<void(long long)>& fn) {
    workers = resolve_workers(workers);
    if (workers <= 1 || count < 2) {
        for (long long i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<long long> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&]() {
            for (;;) {
                const long long i = next.fetch_add(1);
                if (i >= count || failed.load()) return;
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true)) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

/// Deterministic pairwise summation; the result does not depend on how the
/// terms were produced, so parallel runs reproduce bit-for-bit.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const size_t half = v.size() / 2;
    return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

}  // namespace mlsc
