#ifndef ESPMCMC_DIAGNOSTICS_HPP
#define ESPMCMC_DIAGNOSTICS_HPP

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "espmcmc/errors.hpp"

namespace espmcmc {

inline double series_mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double series_variance(std::span<const double> v, double mean) {
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / static_cast<double>(v.size() - 1);
}

/// Integrated autocorrelation time by overlapping batch means with batch
/// size b: with B_j = mean(Y_j..Y_{j+b-1}), j = 1..n-b+1,
///   Var_OBM = n b / ((n-b)(n-b+1)) * sum_j (B_j - Ybar)^2,
///   IACT    = Var_OBM / s^2.
/// The value is returned unmodified (no flooring at 1).
inline double iact_obm(std::span<const double> series, int batch_size) {
  const long n = static_cast<long>(series.size());
  const long b = batch_size;
  if (b < 1) throw InputError("iact_obm: batch size must be positive");
  if (n <= 2 * b) throw InputError("iact_obm: series length must exceed 2b");

  double mean = series_mean(series);
  double s2 = series_variance(series, mean);
  if (s2 <= 0.0)
    throw NumericalError("iact_obm: variance undefined for a constant series");

  // sliding window sum of batches
  double wsum = 0.0;
  for (long i = 0; i < b; ++i) wsum += series[i];
  double acc = 0.0;
  const double inv_b = 1.0 / static_cast<double>(b);
  for (long j = 0;; ++j) {
    double d = wsum * inv_b - mean;
    acc += d * d;
    if (j + b >= n) break;
    wsum += series[j + b] - series[j];
  }
  double var_obm = static_cast<double>(n) * b /
                   (static_cast<double>(n - b) * (n - b + 1)) * acc;
  return var_obm / s2;
}

struct ChainSummary {
  std::string quantity;
  double mean = 0.0;
  double sd = 0.0;
  double iact = 0.0;
  double ess = 0.0;
  int batch_size = 0;
};

inline ChainSummary summarize_series(const std::string& quantity,
                                     std::span<const double> series,
                                     int batch_size) {
  ChainSummary s;
  s.quantity = quantity;
  s.batch_size = batch_size;
  s.mean = series_mean(series);
  s.sd = std::sqrt(series_variance(series, s.mean));
  s.iact = iact_obm(series, batch_size);
  s.ess = static_cast<double>(series.size()) / s.iact;
  return s;
}

}  // namespace espmcmc

#endif  // ESPMCMC_DIAGNOSTICS_HPP
