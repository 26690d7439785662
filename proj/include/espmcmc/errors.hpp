#ifndef ESPMCMC_ERRORS_HPP
#define ESPMCMC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace espmcmc {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Caller passed inconsistent lengths, dimensions or values.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Invalid or incompatible configuration (bad scheme/proposal/model pairing,
/// malformed config file, missing capability such as a linearization).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// All weights collapsed to zero at some time point.
class DegenerateWeightsError : public Error {
 public:
  DegenerateWeightsError(const std::string& what_weights, int time_index)
      : Error(what_weights + " degenerated to zero at time " +
              std::to_string(time_index + 1) + " (1-based)"),
        time(time_index) {}
  int time;  // 0-based
};

/// A proposal produced a non-finite value or an unusable covariance.
class ProposalError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure (singular matrix, undefined variance, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Operation not supported by this model (e.g. no observation sampler).
class UnsupportedOperationError : public Error {
 public:
  using Error::Error;
};

/// Request exceeds a hard resource bound (e.g. exact enumeration too large).
class ResourceError : public Error {
 public:
  using Error::Error;
};

}  // namespace espmcmc

#endif  // ESPMCMC_ERRORS_HPP
