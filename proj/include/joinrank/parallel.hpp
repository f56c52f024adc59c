#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace joinrank {

inline std::size_t& default_threads_ref() {
  static std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

inline std::size_t default_threads() { return default_threads_ref(); }
inline void set_default_threads(std::size_t n) { default_threads_ref() = std::max<std::size_t>(1, n); }

// Runs body(i) for i in [0, n). Each index writes only its own output slot, so results do
// not depend on scheduling.
template <class Body>
void parallel_for(std::size_t n, Body&& body, std::size_t threads = 0) {
  if (threads == 0) threads = default_threads();
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex m;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(m);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

inline std::vector<std::string>& warning_log() {
  static std::vector<std::string> log;
  return log;
}

inline void warn(const std::string& msg) {
  static std::mutex m;
  std::lock_guard<std::mutex> lock(m);
  warning_log().push_back(msg);
  if (std::getenv("JOINRANK_VERBOSE")) std::clog << "warning: " << msg << "\n";
}

}  // namespace joinrank
