#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace knotfield {

// Calls fn(i) for i in [0, n) on up to `workers` threads. Items are claimed
// from a shared counter; callers write results by index, so the outcome does
// not depend on the worker count.
template <class Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) fn(i);
    };
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, workers)), n);
    if (k <= 1) {
        work();
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(k);
    for (std::size_t w = 0; w < k; ++w) pool.emplace_back(work);
}

} // namespace knotfield
