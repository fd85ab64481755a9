#pragma once

#include <chrono>
#include <cstddef>
#include <type_traits>

#include "specsense/common.hpp"

namespace specsense::eval {

namespace detail {
// Keeps the optimiser from discarding a result it can prove unused.
template <typename T>
inline void keep(const T& value) {
  asm volatile("" : : "g"(&value) : "memory");
}
}  // namespace detail

/// Mean wall-clock milliseconds per call of `detector(sample)`, single-threaded,
/// with the sample already in memory. One untimed warm-up call precedes the loop.
template <typename Detector, typename Sample>
double time_detector(Detector&& detector, const Sample& sample, std::size_t n_reps = 200000) {
  if (n_reps == 0) throw Error(Errc::InvalidArgument, "n_reps must be positive");
  {
    auto warm = detector(sample);
    detail::keep(warm);
  }
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < n_reps; ++i) {
    auto r = detector(sample);
    detail::keep(r);
  }
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / static_cast<double>(n_reps);
}

}  // namespace specsense::eval
