#pragma once

#include "gfstack/experiments/csv.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace gfstack::experiments {

using Task = std::function<std::vector<Row>()>;

// GFSTACK_THREADS, else the hardware concurrency.
inline unsigned worker_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* s = std::getenv("GFSTACK_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(s, &end, 10);
    if (end != s && *end == '\0' && v >= 1) hw = static_cast<unsigned>(v);
  }
  return hw;
}

// Runs the tasks on a small pool. Results are concatenated in task order and then
// sorted, so the output does not depend on scheduling.
inline std::vector<Row> run_tasks(const std::vector<Task>& tasks, unsigned workers = worker_count()) {
  std::vector<std::vector<Row>> out(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        out[i] = tasks[i]();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned nw = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(tasks.size())));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < nw; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<Row> rows;
  for (auto& v : out) rows.insert(rows.end(), v.begin(), v.end());
  sort_rows(rows);
  return rows;
}

}  // namespace gfstack::experiments
