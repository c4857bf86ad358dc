#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace relaysec::numerics {

inline constexpr double kInvE = 0.36787944117144232159552377016146;  // 1/e
inline constexpr double kLn2 = 0.69314718055994530941723212145818;
inline constexpr double kSqrtPi = 1.7724538509055160272981674833411;

/// Principal branch W0 of the Lambert W function, solved by Halley iteration.
/// Throws std::domain_error for x < -1/e - 1e-14.
double lambert_w0(double x);

/// Scaled complementary error function exp(x^2) * erfc(x).
double erfc_scaled(double x);

/// Evaluates exp(log_scale) * erfc(z) without forming exp(log_scale) or
/// erfc(z) separately, so huge*tiny products stay finite.
double exp_times_erfc(double log_scale, double z);

struct QuadratureSpec {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_subdivisions = 200;

  void validate() const;
};

/// Thrown when adaptive quadrature runs out of subdivisions. Carries the best
/// estimate reached and its error bound.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(double estimate, double error_bound);

  double estimate() const noexcept { return estimate_; }
  double error_bound() const noexcept { return error_bound_; }

 private:
  double estimate_;
  double error_bound_;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int subdivisions = 0;
};

/// Globally adaptive bisection with a 7-point Gauss / 15-point Kronrod pair.
QuadratureResult integrate_detailed(const std::function<double(double)>& f, double a, double b,
                                    const QuadratureSpec& spec = {});

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        const QuadratureSpec& spec = {}) {
  return integrate_detailed(f, a, b, spec).value;
}

/// Counter-based 64-bit stream (SplitMix64 output function over a keyed
/// counter). A stream is fully determined by (seed, stream id), so substreams
/// can be handed to workers in any order.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Uniform on (0, 1]; never returns 0 so -log(u) stays finite.
  double uniform_open_closed() noexcept;

  /// Uniform on [0, 1).
  double uniform() noexcept;

  /// Independent substream keyed by this stream's key and `index`.
  RandomStream substream(std::uint64_t index) const noexcept;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t z) noexcept;

/// Inverse-CDF exponential draw: -mean * ln(u).
double exponential_from_uniform(double mean, double u);

/// One Exp(mean) draw; consumes exactly one uniform from `rng`.
double sample_exponential(double mean, RandomStream& rng);

}  // namespace relaysec::numerics
