#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace embviz {

/// Runs fn(i) for i in [0, n). With threads > 1 the index range is split into
/// contiguous chunks, one thread per chunk. Each index must write only its own
/// outputs; under that contract results are bitwise identical for any thread
/// count, because per-index work is untouched and no reduction happens here.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = n * w / workers;
        const std::size_t end = n * (w + 1) / workers;
        pool.emplace_back([begin, end, &fn] {
            for (std::size_t i = begin; i < end; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace embviz
