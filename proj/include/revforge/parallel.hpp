// parallel.hpp
//
// Data-parallel map over independent records. Results land at their input
// index, so output order (and therefore output bytes) is identical across
// worker counts and schedules; parallel_map with workers <= 1 runs the
// plain serial loop, which is also the reference the tests compare
// against. fn must be pure up to its derived RNG streams.

#ifndef REVFORGE_PARALLEL_HPP
#define REVFORGE_PARALLEL_HPP

#include <exception>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace revforge {

inline int max_workers() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

template <typename Out, typename In, typename Fn>
std::vector<Out> serial_map(const std::vector<In>& items, Fn fn) {
  std::vector<Out> out;
  out.reserve(items.size());
  for (size_t i = 0; i < items.size(); ++i) out.push_back(fn(items[i], i));
  return out;
}

template <typename Out, typename In, typename Fn>
std::vector<Out> parallel_map(const std::vector<In>& items, int workers, Fn fn) {
#ifdef _OPENMP
  if (workers > 1 && items.size() > 1) {
    std::vector<Out> out(items.size());
    std::vector<std::exception_ptr> errors(items.size());
#pragma omp parallel for num_threads(workers) schedule(dynamic, 1)
    for (long long i = 0; i < static_cast<long long>(items.size()); ++i) {
      try {
        out[static_cast<size_t>(i)] =
            fn(items[static_cast<size_t>(i)], static_cast<size_t>(i));
      } catch (...) {
        errors[static_cast<size_t>(i)] = std::current_exception();
      }
    }
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);  // first by input order
    return out;
  }
#else
  (void)workers;
#endif
  return serial_map<Out>(items, fn);
}

}  // namespace revforge

#endif  // REVFORGE_PARALLEL_HPP
