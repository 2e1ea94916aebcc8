#pragma once

#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace llb {

// Single knob for worker-thread count, set once by the CLI (--threads).
int& thread_count();

// splitmix64: cheap, well-mixed stream splitter. Used to derive independent
// per-probe / per-sample seeds from one user-provided seed so results do not
// depend on scheduling.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed ^ splitmix64(stream + 0x845cull));
}

// Like parallel_for below, but captures the first exception thrown by any
// worker and rethrows it on the calling thread.
void parallel_try_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// Runs fn(i) for i in [0, n). Each index writes only to its own output slot,
// so the result is identical for any thread count. fn must not throw; use
// parallel_try_for for bodies that can.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    int workers = thread_count();
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::size_t per = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        std::size_t lo = w * per, hi = std::min(n, lo + per);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace llb
