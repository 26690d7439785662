#ifndef ESPMCMC_RNG_HPP
#define ESPMCMC_RNG_HPP

#include <cmath>
#include <cstdint>
#include <limits>

#include "espmcmc/errors.hpp"

namespace espmcmc {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Counter-based generator (Philox-4x32-10) with cheap, collision-resistant
/// substream derivation.  Streams are identified by a 64-bit id occupying the
/// upper half of the 128-bit counter; the lower half counts blocks within the
/// stream, so each stream yields 2^65 independent 64-bit values.
///
/// Seeding hierarchy used throughout the library:
///   experiment seed -> chain stream -> sweep stream -> per-draw-site
///   substreams (e.g. per particle).  `substream(k)` derives a child stream
/// deterministically from the parent id and `k`, so results never depend on
/// the order in which work is scheduled.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_hi_(static_cast<std::uint32_t>(seed >> 32)),
        key_lo_(static_cast<std::uint32_t>(seed)),
        stream_(stream),
        counter_(0),
        next_(2) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    if (next_ == 2) refill();
    return buffer_[next_++];
  }

  /// Derive an independent child stream.  Never advances this generator.
  Rng substream(std::uint64_t child) const {
    std::uint64_t sid =
        detail::splitmix64(stream_ ^ detail::splitmix64(child + 0x632BE59BD9B4E019ULL));
    std::uint64_t seed =
        (static_cast<std::uint64_t>(key_hi_) << 32) | key_lo_;
    return Rng(seed, sid);
  }

  std::uint64_t stream_id() const { return stream_; }

  // --- variates -----------------------------------------------------------
  // All distributions are generated from Philox output with fixed algorithms
  // so results are identical across platforms and compilers.

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  /// Uniform on (0, 1]; safe as a log() argument.
  double uniform01_open() { return 1.0 - uniform01(); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Integer uniform on {0, ..., n-1}.
  int uniform_int(int n) {
    if (n <= 0) throw InputError("uniform_int: n must be positive");
    // Rejection-free for practical n; bias < 2^-53 is irrelevant here.
    int k = static_cast<int>(uniform01() * n);
    return k >= n ? n - 1 : k;
  }

  /// Standard normal via Box-Muller (cosine branch).
  double normal() {
    double u1 = uniform01_open();
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi_ * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// Gamma(shape, scale) via Marsaglia-Tsang, boosted for shape < 1.
  double gamma(double shape, double scale) {
    if (shape <= 0.0 || scale <= 0.0)
      throw InputError("gamma: shape and scale must be positive");
    if (shape < 1.0) {
      double u = uniform01_open();
      return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      double u = uniform01_open();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v))
        return scale * d * v;
    }
  }

  /// Inverse-gamma with the scale convention: X ~ IG(shape, scale) iff
  /// scale/X ~ Gamma(shape, 1).
  double inverse_gamma(double shape, double scale) {
    return scale / gamma(shape, 1.0);
  }

  double chi_squared(double dof) { return gamma(0.5 * dof, 2.0); }

  /// Student-t with `dof` degrees of freedom.
  double student_t(double dof) {
    return normal() / std::sqrt(chi_squared(dof) / dof);
  }

  int bernoulli(double p) { return uniform01() < p ? 1 : 0; }

  int binomial(int n, double p) {
    int k = 0;
    for (int i = 0; i < n; ++i) k += bernoulli(p);
    return k;
  }

 private:
  static constexpr double two_pi_ = 6.283185307179586476925286766559;

  static void philox_round(std::uint32_t ctr[4], std::uint32_t k0,
                           std::uint32_t k1) {
    const std::uint64_t m0 = 0xD2511F53ULL * ctr[0];
    const std::uint64_t m1 = 0xCD9E8D57ULL * ctr[2];
    std::uint32_t c0 = static_cast<std::uint32_t>(m1 >> 32) ^ ctr[1] ^ k0;
    std::uint32_t c1 = static_cast<std::uint32_t>(m1);
    std::uint32_t c2 = static_cast<std::uint32_t>(m0 >> 32) ^ ctr[3] ^ k1;
    std::uint32_t c3 = static_cast<std::uint32_t>(m0);
    ctr[0] = c0;
    ctr[1] = c1;
    ctr[2] = c2;
    ctr[3] = c3;
  }

  void refill() {
    std::uint32_t ctr[4] = {
        static_cast<std::uint32_t>(counter_),
        static_cast<std::uint32_t>(counter_ >> 32),
        static_cast<std::uint32_t>(stream_),
        static_cast<std::uint32_t>(stream_ >> 32)};
    std::uint32_t k0 = key_lo_;
    std::uint32_t k1 = key_hi_;
    for (int round = 0; round < 10; ++round) {
      philox_round(ctr, k0, k1);
      k0 += 0x9E3779B9U;
      k1 += 0xBB67AE85U;
    }
    buffer_[0] = (static_cast<std::uint64_t>(ctr[1]) << 32) | ctr[0];
    buffer_[1] = (static_cast<std::uint64_t>(ctr[3]) << 32) | ctr[2];
    next_ = 0;
    ++counter_;
  }

  std::uint32_t key_hi_, key_lo_;
  std::uint64_t stream_;
  std::uint64_t counter_;
  result_type buffer_[2];
  int next_;
};

}  // namespace espmcmc

#endif  // ESPMCMC_RNG_HPP
