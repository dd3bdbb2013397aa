#pragma once

#include <algorithm>
#include <future>
#include <optional>
#include <type_traits>
#include <vector>

namespace simpfact {

/// Applies `f` to 0..n-1 on up to `jobs` threads. Results are in index order
/// whatever the thread count; the first exception thrown is rethrown.
template <typename F>
auto parallel_map(std::size_t n, std::size_t jobs, F&& f) -> std::vector<std::invoke_result_t<F&, std::size_t>> {
  using R = std::invoke_result_t<F&, std::size_t>;
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(1, n));
  std::vector<std::optional<R>> slots(n);
  auto work = [&](std::size_t start) {
    for (std::size_t i = start; i < n; i += jobs) slots[i].emplace(f(i));
  };
  if (jobs == 1) {
    work(0);
  } else {
    std::vector<std::future<void>> futures;
    for (std::size_t t = 0; t < jobs; ++t) futures.push_back(std::async(std::launch::async, work, t));
    for (auto& fu : futures) fu.wait();
    for (auto& fu : futures) fu.get();
  }
  std::vector<R> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace simpfact
