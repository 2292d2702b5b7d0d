#pragma once

#include <cstddef>

namespace gwma::detail {

/// Dense dot product. The omp simd reduction licenses a fixed vectorized
/// summation order, so results are reproducible within a build.
inline double dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
#pragma omp simd reduction(+ : acc)
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

/// Dot of weights against a time-ordered buffer, newest value at *newest,
/// older values at decreasing addresses.
inline double dot_rev(const double* w, const double* newest, std::size_t n) {
    double acc = 0.0;
#pragma omp simd reduction(+ : acc)
    for (std::size_t i = 0; i < n; ++i)
        acc += w[i] * newest[-static_cast<std::ptrdiff_t>(i)];
    return acc;
}

} // namespace gwma::detail
