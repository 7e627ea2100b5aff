#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace infogeo::rng {

/// SplitMix64 finalizer. Statelessly maps a 64-bit input to a
/// well-mixed 64-bit output.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Hashes a tuple of indices into one counter value. Every draw in the
/// toolkit is keyed this way, so draws are independent of evaluation
/// order and of how many other draws exist.
inline std::uint64_t hash_key(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x632BE59BD9B4E019ull;
  for (std::uint64_t p : parts) h = splitmix64(h ^ p);
  return h;
}

/// Maps 64 random bits to the open interval (0, 1).
inline double to_unit_interval(std::uint64_t h) {
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
}

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

/// Inverse standard normal CDF: Acklam's rational approximation refined
/// by one Newton step, giving ~1e-15 absolute accuracy on (0,1).
inline double normal_quantile(double p) {
  static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                  -2.759285104469687e+02, 1.383577518672690e+02,
                                  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                  -1.556989798598866e+02, 6.680131188771972e+01,
                                  -1.328068155288572e+01};
  static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                  -2.400758277161838e+00, -2.549732539343734e+00,
                                  4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                  2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // One Newton step on Phi(x) = p.
  const double e = normal_cdf(x) - p;
  x -= e / normal_pdf(x);
  return x;
}

/// Standard normal draw keyed by (seed, a, b, c).
inline double keyed_standard_normal(std::uint64_t seed, std::uint64_t a,
                                    std::uint64_t b, std::uint64_t c) {
  return normal_quantile(to_unit_interval(hash_key({seed, a, b, c})));
}

/// Sequential counter stream for places that just need "the next draw"
/// (test point generation, Latin hypercube starts, Monte Carlo loops).
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  double uniform() { return to_unit_interval(hash_key({seed_, n_++})); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() { return normal_quantile(uniform()); }

  std::uint64_t next_u64() { return hash_key({seed_, n_++}); }

 private:
  std::uint64_t seed_;
  std::uint64_t n_ = 0;
};

}  // namespace infogeo::rng
