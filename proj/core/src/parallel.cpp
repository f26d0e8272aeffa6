#include "arrivallab/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace arrivallab::parallel {
namespace {

std::atomic<int> g_jobs{0};

int resolve_jobs() {
  int jobs = g_jobs.load();
  if (jobs < 1) {
    jobs = static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
  }
  return jobs;
}

}  // namespace

void set_max_jobs(int jobs) { g_jobs.store(jobs); }

int max_jobs() { return resolve_jobs(); }

void for_each_index(std::size_t count, const std::function<void(std::size_t)>& body) {
  const auto jobs = static_cast<std::size_t>(resolve_jobs());
  if (jobs <= 1 || count < 2 * jobs) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }

  const std::size_t chunk = (count + jobs - 1) / jobs;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (std::size_t w = 0; w < jobs; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    workers.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace arrivallab::parallel
