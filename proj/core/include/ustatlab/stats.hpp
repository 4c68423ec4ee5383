#pragma once

// Small statistics toolkit: binomial confidence intervals, quantiles,
// least squares, and tail integrals of empirical / discrete laws.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace ustat {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Two-sided 95% normal quantile.
inline constexpr double kZ95 = 1.959963984540054;

/// Wilson score interval for a binomial proportion.
Interval wilson(std::uint64_t successes, std::uint64_t trials, double z = kZ95);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

/// Sample mean and its standard error (n - 1 denominator).
MeanSe mean_se(std::span<const double> values);

/// Linear-interpolation quantile (type 7) of unsorted values.
double quantile(std::vector<double> values, double q);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

/// Ordinary least squares y = intercept + slope * x. Needs >= 2 points with
/// distinct x.
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

/// Fraction of values strictly above t, for sorted values.
double tail_fraction(std::span<const double> sorted, double t);

/// Composite Gauss-Legendre rule (8 nodes per panel) on [a, b].
double integrate(const std::function<double(double)>& f, double a, double b,
                 std::size_t panels = 1);

/// Law of a nonnegative random variable T, queried through its survival
/// function P(T > t).
class TailOracle {
 public:
  /// Empirical law of the samples.
  static TailOracle empirical(std::vector<double> samples);
  /// T == cutoff almost surely: P(T > t) = 1{t < cutoff}.
  static TailOracle cutoff(double bound);
  /// Finite law with the given values and probabilities.
  static TailOracle discrete(std::vector<double> values, std::vector<double> probs);
  /// Arbitrary survival function without a known support bound.
  static TailOracle analytic(std::function<double(double)> survival);

  double survival(double t) const;
  /// Largest point of the support when finite.
  bool bounded() const noexcept { return bounded_; }
  double support_max() const noexcept { return support_max_; }
  /// Points where the survival function jumps (sorted); empty for analytic.
  const std::vector<double>& jumps() const noexcept { return jumps_; }

 private:
  TailOracle() = default;

  std::vector<double> jumps_;   // sorted distinct values
  std::vector<double> above_;   // above_[i] = P(T > jumps_[i])
  double below_first_ = 1.0;    // P(T > t) for t < jumps_.front()
  std::function<double(double)> fn_;
  bool bounded_ = true;
  double support_max_ = 0.0;
};

struct TailIntegral {
  double value = 0.0;
  bool diverged = false;
};

/// int_1^inf weight(u) P(T > scale * u) du for scale > 0. Bounded laws are
/// integrated panel by panel between the jumps of the survival function
/// (`resolution` Gauss-Legendre panels per piece). Unbounded laws double the
/// upper limit until the increments are negligible; no convergence after
/// `max_doublings` raises the diverged flag.
TailIntegral tail_integral(const TailOracle& law, double scale,
                           const std::function<double(double)>& weight,
                           std::size_t resolution = 1, int max_doublings = 64);

}  // namespace ustat
