#include "stokesim/parallel.hpp"

#include <atomic>
#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace stokesim {

void parallel_for(int begin, int end, int jobs, const std::function<void(int)>& fn) {
  const int count = end - begin;
  if (count <= 0) return;
  jobs = std::clamp(jobs, 1, count);
  if (jobs == 1) {
    for (int i = begin; i < end; ++i) fn(i);
    return;
  }

  std::atomic<int> next{begin};
  std::exception_ptr first_error;
  std::mutex error_mu;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= end) return;
      try {
        fn(i);
      } catch (...) {
        std::scoped_lock lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(jobs - 1);
  for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace stokesim
