#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace bdlab {

// process-wide worker count; 0 means hardware concurrency
inline std::atomic<int>& thread_setting() {
    static std::atomic<int> n{1};
    return n;
}

inline void set_threads(int n) { thread_setting() = std::max(0, n); }

inline int threads() {
    int n = thread_setting();
    if (n <= 0) n = int(std::max(1u, std::thread::hardware_concurrency()));
    return n;
}

// calls fn(i) for i in [0, n); every task writes only its own slot, so results do not
// depend on the worker count
template <class Fn>
void parallel_for(long n, const Fn& fn) {
    int nt = int(std::min<long>(threads(), n));
    if (nt <= 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<long> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto worker = [&] {
        for (;;) {
            long i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mu);
                if (!err) err = std::current_exception();
                next = n;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace bdlab
