#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace palign {

// Chunked parallel loop over [0, n). threads <= 1 runs inline. Results must be
// written to disjoint per-index slots; aggregation stays with the caller so
// output ordering is deterministic.
inline void parallelFor(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace palign
