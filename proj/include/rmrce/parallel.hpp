#pragma once

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rmrce {

inline int default_thread_count() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

// Runs fn(task) for task = 0..count-1 on up to `threads` workers. Each task
// writes only to its own slot, so results are identical for any thread count;
// the first exception is rethrown after all workers join.
template <typename Fn>
inline void parallel_tasks(int count, int threads, Fn&& fn) {
    if (count <= 0) return;
    if (threads <= 1 || count == 1) {
        for (int t = 0; t < count; ++t) fn(t);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    auto worker = [&] {
        for (;;) {
            const int task = next.fetch_add(1);
            if (task >= count) return;
            try {
                fn(task);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const int n_workers = std::min(threads, count);
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

} // namespace rmrce
