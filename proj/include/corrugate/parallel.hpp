#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <thread>
#include <vector>

namespace corrugate {

// Worker count, capped by CORRUGATE_THREADS when set.
inline int worker_count() {
    int n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* env = std::getenv("CORRUGATE_THREADS")) {
        int cap = std::atoi(env);
        if (cap >= 1) n = std::min(n, cap);
    }
    return n;
}

// Runs f(begin, end) on disjoint contiguous chunks. Callers keep reductions
// out of f so results do not depend on the worker count.
template <class F>
void parallel_for(std::size_t count, F&& f) {
    const int workers = worker_count();
    if (workers <= 1 || count < 4096) {
        f(std::size_t(0), count);
        return;
    }
    const std::size_t chunk = (count + workers - 1) / workers;
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) {
        std::size_t b = t * chunk, e = std::min(count, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&f, b, e] { f(b, e); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace corrugate
