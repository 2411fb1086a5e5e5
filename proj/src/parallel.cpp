#include "parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qrisk {

namespace {
std::atomic<uint32_t> g_max_jobs{0};
} // namespace

void set_max_jobs(uint32_t jobs) { g_max_jobs.store(jobs); }

uint32_t max_jobs() {
    const uint32_t configured = g_max_jobs.load();
    if (configured > 0) return configured;
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(size_t n, const std::function<void(size_t)>& body) {
    const size_t workers = std::min<size_t>(max_jobs(), n);
    if (workers <= 1) {
        for (size_t i = 0; i < n; ++i) body(i);
        return;
    }

    std::atomic<size_t> next{0};
    std::mutex error_mu;
    std::exception_ptr first_error;

    auto run = [&] {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= n) return;
            {
                std::lock_guard<std::mutex> lock(error_mu);
                if (first_error) return; // abandon remaining work
            }
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t t = 0; t < workers; ++t) pool.emplace_back(run);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace qrisk
