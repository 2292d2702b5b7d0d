#pragma once

#include <stdexcept>
#include <string>

namespace gwma {

/// Transient recursion reached its step cap while survival mass was still
/// above the cutoff. Raise MarkovConfig::max_t rather than truncating.
class HorizonError : public std::runtime_error {
public:
    explicit HorizonError(const std::string& what) : std::runtime_error(what) {}
};

/// The state grid is too coarse to resolve one observation step.
class ResolutionError : public std::runtime_error {
public:
    explicit ResolutionError(const std::string& what) : std::runtime_error(what) {}
};

/// Conditioning event (no signal before the change point) has vanishing
/// probability; the conditional distribution cannot be formed.
class ConditioningError : public std::runtime_error {
public:
    explicit ConditioningError(const std::string& what) : std::runtime_error(what) {}
};

/// Monte Carlo estimation produced no usable replicates.
class EstimationError : public std::runtime_error {
public:
    explicit EstimationError(const std::string& what) : std::runtime_error(what) {}
};

/// Control-limit search failed: bracket expansion exhausted or the Monte
/// Carlo noise floor sits above the requested tolerance.
class CalibrationError : public std::runtime_error {
public:
    explicit CalibrationError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace gwma
