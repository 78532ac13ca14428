#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace gdlab {

// Run f(k) for k in [0, count) on up to `jobs` threads.  Tasks write into
// caller-owned slots indexed by k, so results are position-stable and the
// caller can reduce them in fixed order afterwards.
template <typename F>
void parallel_for(std::size_t count, std::size_t jobs, F&& f) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t k = 0; k < count; ++k) f(k);
        return;
    }
    if (jobs > count) jobs = count;
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= count) return;
            try {
                f(k);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace gdlab
