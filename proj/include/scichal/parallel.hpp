#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <type_traits>
#include <vector>

namespace scichal {

// Order-preserving parallel map. Each worker handles a contiguous chunk and
// writes into its own slots, so output order equals input order for any
// worker count. The first exception thrown by any worker is rethrown.
template <typename In, typename Fn>
auto parallel_map(const std::vector<In>& items, Fn&& fn, std::size_t jobs = 1)
    -> std::vector<std::invoke_result_t<Fn&, const In&>> {
  using Out = std::invoke_result_t<Fn&, const In&>;
  std::vector<Out> out(items.size());
  jobs = std::max<std::size_t>(1, std::min(jobs, items.size()));
  if (jobs == 1) {
    for (std::size_t i = 0; i < items.size(); ++i) out[i] = fn(items[i]);
    return out;
  }
  std::vector<std::exception_ptr> errors(jobs);
  std::vector<std::thread> workers;
  const std::size_t chunk = (items.size() + jobs - 1) / jobs;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      try {
        const std::size_t end = std::min(items.size(), (w + 1) * chunk);
        for (std::size_t i = w * chunk; i < end; ++i) out[i] = fn(items[i]);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : workers) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace scichal
