#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace mixot {

// Worker count: MIXOT_THREADS when set (0 or 1 disables threading entirely),
// hardware concurrency otherwise.
inline int worker_count() {
    if (const char* env = std::getenv("MIXOT_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 0) return n > 0 ? n : 1;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Index-keyed parallel loop: fn(i) runs once for every i in [0, count), in
// unspecified order but with results keyed by i, so any assembly done by the
// caller is deterministic regardless of the worker count.
inline void parallel_for(int count, const std::function<void(int)>& fn,
                         int threads = -1) {
    if (threads < 0) threads = worker_count();
    if (threads <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_lock;
    auto worker = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> hold(failure_lock);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int spawn = std::min(threads, count);
    pool.reserve(spawn);
    for (int t = 0; t < spawn; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace mixot
