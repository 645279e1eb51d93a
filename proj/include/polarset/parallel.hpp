#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <vector>

namespace polarset {

/// Worker count used by parallel_for; 1 disables threading. Results never
/// depend on this value.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Calls fn(i) for i in [0, n) on up to thread_count() threads. Each index is
/// handled exactly once; the first exception (by index) is rethrown. Calls made
/// from inside a running loop are serial.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

/// out[i] = fn(i), computed with parallel_for.
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, F&& fn) {
  std::vector<T> out(n);
  parallel_for(n, [&](std::size_t i) { out[i] = fn(i); });
  return out;
}

}  // namespace polarset
