#include "flatnas/util.hpp"

#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace flatnas {

void parallel_for_indexed(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs < 1) throw InvalidParameter("jobs must be >= 1");
    if (jobs == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);  // first failure by index, deterministic
}

}  // namespace flatnas
