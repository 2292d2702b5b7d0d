#pragma once

#include <cmath>
#include <cstdint>

namespace gwma {

/// Welford (count, mean, M2) accumulator with the parallel merge rule.
/// Merging in a fixed order gives bit-identical results regardless of how
/// work was scheduled.
struct RunningStat {
    std::int64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++count;
        const double d = x - mean;
        mean += d / static_cast<double>(count);
        m2 += d * (x - mean);
    }

    void merge(const RunningStat& other) {
        if (other.count == 0) return;
        if (count == 0) {
            *this = other;
            return;
        }
        const std::int64_t n = count + other.count;
        const double d = other.mean - mean;
        mean = (static_cast<double>(count) * mean +
                static_cast<double>(other.count) * other.mean) / static_cast<double>(n);
        m2 += other.m2 + d * d * static_cast<double>(count) *
              static_cast<double>(other.count) / static_cast<double>(n);
        count = n;
    }

    double sample_variance() const {
        return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0;
    }

    /// Standard error of the mean.
    double std_error() const {
        return count > 0 ? std::sqrt(sample_variance() / static_cast<double>(count)) : 0.0;
    }
};

} // namespace gwma
