#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace visco {

/// Worker count from VISCO_THREADS, else the hardware concurrency.
inline int thread_count() {
    if (const char* env = std::getenv("VISCO_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls body(i) for i in [0, count). Iterations must be independent; the first
/// exception thrown by any iteration is rethrown on the calling thread.
template <class Body>
void parallel_for(int count, Body&& body) {
    const int workers = std::min(thread_count(), count);
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (int i = w; i < count; i += workers) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

} // namespace visco
