#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace revex {

// Runs fn(i) for i in [0, count) on `jobs` worker threads. Each index is
// claimed exactly once; callers write results into per-index slots, so the
// outcome is identical for any worker count.
template <typename Fn>
void parallel_for(std::size_t count, unsigned jobs, Fn&& fn) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    unsigned spawn = jobs < count ? jobs : static_cast<unsigned>(count);
    workers.reserve(spawn);
    for (unsigned t = 0; t < spawn; ++t) {
        workers.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= count) break;
                fn(i);
            }
        });
    }
    for (auto& w : workers) w.join();
}

}  // namespace revex
