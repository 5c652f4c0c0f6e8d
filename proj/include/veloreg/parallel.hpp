#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

namespace veloreg {

/// Deterministic data parallelism: work is split into a fixed number of
/// chunks that does not depend on the worker count, each output element is
/// written by exactly one worker, and reductions combine per-chunk partials
/// in chunk order. Results are therefore bitwise independent of --threads.
namespace par {

inline std::atomic<int>& worker_count() {
    static std::atomic<int> n{1};
    return n;
}
inline void set_workers(int n) { worker_count().store(std::max(1, n)); }
inline int workers() { return worker_count().load(); }

inline constexpr int chunk_count = 64;

template <typename Fn>
void run_chunks(std::int64_t begin, std::int64_t end, Fn&& fn) {
    const std::int64_t total = end - begin;
    if (total <= 0) return;
    const int chunks = static_cast<int>(std::min<std::int64_t>(chunk_count, total));
    auto chunk_range = [&](int c) {
        std::int64_t lo = begin + total * c / chunks;
        std::int64_t hi = begin + total * (c + 1) / chunks;
        return std::pair<std::int64_t, std::int64_t>(lo, hi);
    };
    const int nw = std::min(workers(), chunks);
    if (nw <= 1) {
        for (int c = 0; c < chunks; ++c) {
            auto [lo, hi] = chunk_range(c);
            fn(c, lo, hi);
        }
        return;
    }
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            int c = next.fetch_add(1);
            if (c >= chunks) return;
            auto [lo, hi] = chunk_range(c);
            fn(c, lo, hi);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nw) - 1);
    for (int t = 1; t < nw; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
}

/// Elementwise loop; fn(i) must touch only index i of its outputs.
template <typename Fn>
void for_each(std::int64_t n, Fn&& fn) {
    run_chunks(0, n, [&](int, std::int64_t lo, std::int64_t hi) {
        for (std::int64_t i = lo; i < hi; ++i) fn(i);
    });
}

/// Deterministic sum reduction: per-chunk partials accumulated serially in
/// chunk order, all in double.
template <typename Fn>
double sum(std::int64_t n, Fn&& term) {
    double partial[chunk_count] = {};
    run_chunks(0, n, [&](int c, std::int64_t lo, std::int64_t hi) {
        double s = 0.0;
        for (std::int64_t i = lo; i < hi; ++i) s += term(i);
        partial[c] = s;
    });
    double total = 0.0;
    const int chunks = static_cast<int>(std::min<std::int64_t>(chunk_count, n));
    for (int c = 0; c < chunks; ++c) total += partial[c];
    return total;
}

template <typename Fn>
double max(std::int64_t n, Fn&& term) {
    double partial[chunk_count];
    std::fill(partial, partial + chunk_count, -1e300);
    run_chunks(0, n, [&](int c, std::int64_t lo, std::int64_t hi) {
        double m = -1e300;
        for (std::int64_t i = lo; i < hi; ++i) m = std::max(m, term(i));
        partial[c] = m;
    });
    double total = -1e300;
    const int chunks = static_cast<int>(std::min<std::int64_t>(chunk_count, n));
    for (int c = 0; c < chunks; ++c) total = std::max(total, partial[c]);
    return total;
}

} // namespace par
} // namespace veloreg
