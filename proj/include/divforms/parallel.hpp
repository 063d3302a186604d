#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace divforms {

// 0 means: DIVFORMS_THREADS if set, else 1
inline unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("DIVFORMS_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return unsigned(v);
    }
    return 1;
}

// Runs fn(chunk) for chunk in [0, n_chunks) on up to `threads` workers.
// Chunks are claimed dynamically; callers write one result slot per chunk
// and reduce the slots in chunk order, so results do not depend on the
// worker count.
template <class Fn>
void parallel_chunks(std::size_t n_chunks, unsigned threads, Fn&& fn) {
    threads = resolve_threads(threads);
    if (threads <= 1 || n_chunks <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) fn(c);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        while (true) {
            std::size_t c = next.fetch_add(1);
            if (c >= n_chunks) return;
            try {
                fn(c);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                next = n_chunks;
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    unsigned n = unsigned(std::min<std::size_t>(threads, n_chunks));
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

// Neumaier-compensated accumulator for real sums
struct CompensatedSum {
    long double sum = 0, comp = 0;
    void add(long double x) {
        long double t = sum + x;
        if (std::fabs(sum) >= std::fabs(x)) comp += (sum - t) + x;
        else comp += (x - t) + sum;
        sum = t;
    }
    long double value() const { return sum + comp; }
};

}  // namespace divforms
