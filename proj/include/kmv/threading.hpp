#pragma once

// Chunked parallel-for over an index range and deterministic pairwise
// summation. Results are independent of the worker count: workers own
// disjoint index blocks and all reductions run in fixed index order.

#include <cstddef>
#include <thread>
#include <vector>

namespace kmv {

template <class F>
void parallel_for(std::size_t begin, std::size_t end, int threads, const F& fn) {
    const std::size_t n = end - begin;
    if (threads <= 1 || n < 2) {
        for (std::size_t i = begin; i < end; ++i) fn(i);
        return;
    }
    const std::size_t nt = std::min<std::size_t>(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        std::size_t lo = begin + n * t / nt;
        std::size_t hi = begin + n * (t + 1) / nt;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

// Pairwise (binary-tree) sum of value(i) over [lo,hi); fixed association order.
template <class Getter>
double pairwise_sum(std::size_t lo, std::size_t hi, const Getter& value) {
    const std::size_t n = hi - lo;
    if (n == 0) return 0.0;
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += value(i);
        return s;
    }
    std::size_t mid = lo + n / 2;
    return pairwise_sum(lo, mid, value) + pairwise_sum(mid, hi, value);
}

} // namespace kmv
