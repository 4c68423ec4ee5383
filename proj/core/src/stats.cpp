#include "ustatlab/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "ustatlab/error.hpp"

namespace ustat {

Interval wilson(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  if (successes > trials) throw InvalidSpecError("wilson: successes exceed trials");
  const auto n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::clamp(center - half, 0.0, p), std::clamp(center + half, p, 1.0)};
}

MeanSe mean_se(std::span<const double> values) {
  if (values.empty()) return {};
  const auto n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidSpecError("quantile: no values");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidSpecError("quantile: q outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("least_squares: length mismatch");
  if (x.size() < 2) throw InvalidSpecError("least_squares: need at least 2 points");
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw InvalidSpecError("least_squares: x values are all equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  fit.points = x.size();
  return fit;
}

double tail_fraction(std::span<const double> sorted, double t) {
  if (sorted.empty()) return 0.0;
  const auto it = std::upper_bound(sorted.begin(), sorted.end(), t);
  return static_cast<double>(sorted.end() - it) / static_cast<double>(sorted.size());
}

namespace {

constexpr std::array<double, 4> kGlNodes = {0.1834346424956498, 0.5255324099163290,
                                            0.7966664774136267, 0.9602898564975363};
constexpr std::array<double, 4> kGlWeights = {0.3626837833783620, 0.3137066458778873,
                                              0.2223810344533745, 0.1012285362903763};

double gl_panel(const std::function<double(double)>& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t i = 0; i < kGlNodes.size(); ++i) {
    s += kGlWeights[i] * (f(mid - half * kGlNodes[i]) + f(mid + half * kGlNodes[i]));
  }
  return s * half;
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 std::size_t panels) {
  if (panels == 0) panels = 1;
  if (b <= a) return 0.0;
  const double width = (b - a) / static_cast<double>(panels);
  double s = 0.0;
  for (std::size_t i = 0; i < panels; ++i) {
    const double lo = a + width * static_cast<double>(i);
    const double hi = i + 1 == panels ? b : lo + width;
    s += gl_panel(f, lo, hi);
  }
  return s;
}

TailOracle TailOracle::empirical(std::vector<double> samples) {
  if (samples.empty()) throw InvalidSpecError("tail oracle: no samples");
  std::sort(samples.begin(), samples.end());
  const auto n = static_cast<double>(samples.size());
  TailOracle o;
  for (std::size_t i = 0; i < samples.size();) {
    std::size_t j = i;
    while (j < samples.size() && samples[j] == samples[i]) ++j;
    o.jumps_.push_back(samples[i]);
    o.above_.push_back(static_cast<double>(samples.size() - j) / n);
    i = j;
  }
  o.support_max_ = samples.back();
  return o;
}

TailOracle TailOracle::cutoff(double bound) {
  if (!(bound >= 0.0) || !std::isfinite(bound))
    throw InvalidSpecError("tail oracle: cutoff must be finite and >= 0");
  TailOracle o;
  o.jumps_ = {bound};
  o.above_ = {0.0};
  o.support_max_ = bound;
  return o;
}

TailOracle TailOracle::discrete(std::vector<double> values, std::vector<double> probs) {
  if (values.empty() || values.size() != probs.size())
    throw InvalidSpecError("tail oracle: values and probabilities must match and be nonempty");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw InvalidSpecError("tail oracle: negative probability");
    total += p;
  }
  TailOracle o;
  o.below_first_ = total;
  double remaining = total;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    double mass = 0.0;
    while (j < order.size() && values[order[j]] == values[order[i]]) mass += probs[order[j++]];
    remaining -= mass;
    o.jumps_.push_back(values[order[i]]);
    o.above_.push_back(std::max(0.0, remaining));
    i = j;
  }
  o.above_.back() = 0.0;
  o.support_max_ = o.jumps_.back();
  return o;
}

TailOracle TailOracle::analytic(std::function<double(double)> survival) {
  if (!survival) throw InvalidSpecError("tail oracle: empty survival function");
  TailOracle o;
  o.fn_ = std::move(survival);
  o.bounded_ = false;
  o.support_max_ = INFINITY;
  return o;
}

double TailOracle::survival(double t) const {
  if (fn_) return fn_(t);
  const auto it = std::upper_bound(jumps_.begin(), jumps_.end(), t);
  if (it == jumps_.begin()) return below_first_;
  return above_[static_cast<std::size_t>(it - jumps_.begin()) - 1];
}

TailIntegral tail_integral(const TailOracle& law, double scale,
                           const std::function<double(double)>& weight, std::size_t resolution,
                           int max_doublings) {
  if (!(scale > 0.0)) throw InvalidSpecError("tail_integral: scale must be > 0");
  TailIntegral out;
  if (law.bounded()) {
    const double u_end = law.support_max() / scale;
    if (!(u_end > 1.0)) return out;
    std::vector<double> cuts{1.0};
    for (double j : law.jumps()) {
      const double u = j / scale;
      if (u > 1.0 && u < u_end) cuts.push_back(u);
    }
    cuts.push_back(u_end);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double a = cuts[i], b = cuts[i + 1];
      if (b <= a) continue;
      const double s = law.survival(scale * 0.5 * (a + b));
      if (s == 0.0) continue;
      out.value += s * integrate(weight, a, b, resolution);
    }
    return out;
  }
  const auto integrand = [&](double u) { return weight(u) * law.survival(scale * u); };
  const std::size_t panels = 16 * std::max<std::size_t>(resolution, 1);
  double lo = 1.0, hi = 2.0;
  out.value = integrate(integrand, lo, hi, panels);
  for (int d = 0; d < max_doublings; ++d) {
    lo = hi;
    hi *= 2.0;
    const double inc = integrate(integrand, lo, hi, panels);
    out.value += inc;
    if (std::abs(inc) <= 1e-13 * (1.0 + std::abs(out.value))) return out;
  }
  out.diverged = true;
  return out;
}

}  // namespace ustat
