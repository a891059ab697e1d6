#pragma once

#include <cstdlib>
#include <thread>
#include <vector>

namespace ktf {

/// Default worker count: KTF_THREADS env var when set, else 1.
inline int default_threads() {
    if (const char* env = std::getenv("KTF_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    return 1;
}

/// Static split of [0, count) across `threads` workers. Work items must write
/// to disjoint slots; results are then independent of the schedule.
template <typename Fn>
void parallel_for(long long count, int threads, Fn&& fn) {
    if (count <= 0) return;
    if (threads <= 1 || count == 1) {
        for (long long i = 0; i < count; ++i) fn(i);
        return;
    }
    const int w = static_cast<int>(std::min<long long>(threads, count));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(w));
    for (int t = 0; t < w; ++t) {
        pool.emplace_back([&, t]() {
            for (long long i = t; i < count; i += w) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace ktf
