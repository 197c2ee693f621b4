#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <optional>
#include <thread>
#include <type_traits>
#include <vector>

namespace curate {

template <class T>
struct Outcome {
  std::optional<T> value;
  std::exception_ptr error;

  bool ok() const noexcept { return value.has_value(); }
};

// Runs fn(i) for i in [0, count) on up to `workers` threads. Results come back in
// index order no matter which call finishes first; exceptions are captured per item.
template <class Fn>
auto parallel_map(std::size_t count, std::size_t workers, Fn&& fn)
    -> std::vector<Outcome<std::invoke_result_t<Fn&, std::size_t>>> {
  using T = std::invoke_result_t<Fn&, std::size_t>;
  std::vector<Outcome<T>> results(count);
  auto run_one = [&](std::size_t i) {
    try {
      results[i].value.emplace(fn(i));
    } catch (...) {
      results[i].error = std::current_exception();
    }
  };
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) run_one(i);
    return results;
  }
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) run_one(i);
      });
    }
  }
  return results;
}

}  // namespace curate
