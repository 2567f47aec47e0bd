#include "litfetch/search.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace litfetch {

void for_each_bounded(std::size_t n, std::size_t bound,
                      const std::function<void(std::size_t)>& fn,
                      const std::function<bool()>& stop) {
  if (n == 0) return;
  std::size_t workers = std::clamp<std::size_t>(bound, 1, n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mu;
  auto run = [&] {
    for (;;) {
      if (stop && stop()) return;
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        // fn is expected to handle its own errors; anything escaping is a
        // bug, so keep the first and stop handing out work.
        std::lock_guard lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        next.store(n);
      }
    }
  };
  if (workers == 1) {
    run();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) threads.emplace_back(run);
    for (auto& t : threads) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace litfetch
