#include "ustatlab/martingale.hpp"

#include <algorithm>
#include <cmath>

#include "ustatlab/error.hpp"
#include "ustatlab/parallel.hpp"
#include "ustatlab/stats.hpp"

namespace ustat {

std::string to_string(MdsGenerator g) {
  switch (g) {
    case MdsGenerator::kBoundedSigns:
      return "bounded-signs";
    case MdsGenerator::kGaussianCoords:
      return "gaussian-coords";
    case MdsGenerator::kF0RandomizedScale:
      return "f0-randomized-scale";
  }
  return "?";
}

std::optional<MdsGenerator> parse_generator(const std::string& name) {
  if (name == "bounded-signs") return MdsGenerator::kBoundedSigns;
  if (name == "gaussian-coords") return MdsGenerator::kGaussianCoords;
  if (name == "f0-randomized-scale") return MdsGenerator::kF0RandomizedScale;
  return std::nullopt;
}

std::string to_string(InequalityVariant v) {
  switch (v) {
    case InequalityVariant::kReal:
      return "real";
    case InequalityVariant::kA2:
      return "A2";
    case InequalityVariant::kA3:
      return "A3";
    case InequalityVariant::kConv:
      return "conv";
  }
  return "?";
}

std::optional<InequalityVariant> parse_variant(const std::string& name) {
  if (name == "real") return InequalityVariant::kReal;
  if (name == "A2") return InequalityVariant::kA2;
  if (name == "A3") return InequalityVariant::kA3;
  if (name == "conv") return InequalityVariant::kConv;
  return std::nullopt;
}

void MartingalePath::validate() const {
  if (increments.size() != cond_second.size())
    throw DimensionError("martingale path: increments and conditional moments differ in length");
  for (const auto& d : increments) {
    if (!same_space(d.space(), increments.front().space()))
      throw DimensionError("martingale path: increments live in different spaces");
  }
  for (double c : cond_second) {
    if (!(c >= 0.0)) throw PreconditionError("martingale path: negative conditional moment");
  }
  if (f0_measurable && !cond_second.empty()) {
    for (double c : cond_second) {
      if (c != cond_second.front())
        throw PreconditionError("martingale path: F_0 flag set but moments vary along the path");
    }
  }
}

MartingalePath simulate_mds(MdsGenerator g, std::size_t n, const SpacePtr& space,
                            CounterRng& rng) {
  if (n < 1) throw InvalidSpecError("simulate_mds: need n >= 1");
  const std::size_t dim = space->dim();
  const auto w = space->weights();
  double wsum = 0.0;
  for (double v : w) wsum += v;
  MartingalePath path;
  path.increments.reserve(n);
  path.cond_second.reserve(n);
  path.f0_measurable = true;
  switch (g) {
    case MdsGenerator::kBoundedSigns:
      for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> c(dim, 0.0);
        const std::size_t axis = j % dim;
        c[axis] = rng.sign() / std::sqrt(w[axis]);
        path.increments.emplace_back(space, std::move(c));
        path.cond_second.push_back(1.0);
      }
      break;
    case MdsGenerator::kGaussianCoords:
      for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> c(dim);
        for (auto& v : c) v = rng.normal();
        path.increments.emplace_back(space, std::move(c));
        path.cond_second.push_back(wsum);
      }
      break;
    case MdsGenerator::kF0RandomizedScale: {
      const double s = 0.5 + rng.uniform();
      const double unit = s / std::sqrt(wsum);
      for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> c(dim);
        for (auto& v : c) v = unit * rng.sign();
        path.increments.emplace_back(space, std::move(c));
        path.cond_second.push_back(s * s);
      }
      break;
    }
  }
  return path;
}

MartingalePath simulate_mds(MdsGenerator g, std::size_t n, const SpacePtr& space,
                            std::uint64_t seed, std::uint64_t stream) {
  CounterRng rng(seed, stream, 0);
  return simulate_mds(g, n, space, rng);
}

PathSummary summarize(const MartingalePath& path) {
  path.validate();
  PathSummary s;
  s.f0_measurable = path.f0_measurable;
  if (path.increments.empty()) return s;
  const auto& space = path.increments.front().space();
  s.real = space->dim() == 1;
  std::vector<double> partial(space->dim(), 0.0);
  for (std::size_t j = 0; j < path.increments.size(); ++j) {
    const auto d = path.increments[j].coords();
    for (std::size_t i = 0; i < partial.size(); ++i) partial[i] += d[i];
    s.max_partial = std::max(s.max_partial, space->norm(partial));
    const double sq = space->inner(d, d);
    s.sum_sq += sq;
    s.quad += sq + path.cond_second[j];
  }
  return s;
}

std::vector<PathSummary> simulate_summaries(MdsGenerator g, std::size_t n,
                                            const SpacePtr& space, std::size_t replicas,
                                            std::uint64_t seed, int threads) {
  std::vector<PathSummary> out(replicas);
  parallel_for(replicas, threads, [&](std::size_t r) {
    out[r] = summarize(simulate_mds(g, n, space, seed, r));
  });
  return out;
}

namespace {

void require_paths(std::size_t count) {
  if (count < kMinInequalityPaths)
    throw PreconditionError("inequality check: need at least " +
                            std::to_string(kMinInequalityPaths) + " paths");
}

void require_grid(double x, double y) {
  if (!(x > 0.0) || !(y > 0.0) || !std::isfinite(x) || !std::isfinite(y))
    throw InvalidSpecError("inequality check: x and y must be positive and finite");
}

// Left side P(max ||S_k|| > x) with its Wilson interval.
void fill_lhs(std::span<const PathSummary> paths, double x, InequalityCheck& c) {
  std::uint64_t hits = 0;
  for (const auto& p : paths) hits += p.max_partial > x ? 1 : 0;
  c.lhs = static_cast<double>(hits) / static_cast<double>(paths.size());
  const Interval ci = wilson(hits, paths.size());
  c.lhs_ci_lo = ci.lo;
  c.lhs_ci_hi = ci.hi;
}

void finish(InequalityCheck& c) { c.violated = c.lhs_ci_lo > c.rhs_ci_hi; }

}  // namespace

InequalityCheck check_real_inequality(std::span<const PathSummary> paths, double x, double y) {
  require_paths(paths.size());
  require_grid(x, y);
  for (const auto& p : paths) {
    if (!p.real) throw DimensionError("real inequality: paths must be real-valued");
  }
  InequalityCheck c{x, y};
  fill_lhs(paths, x, c);
  const double e = 2.0 * std::exp(-(x * x) / (y * y));
  std::uint64_t hits = 0;
  for (const auto& p : paths) hits += p.quad > y * y / 2.0 ? 1 : 0;
  const Interval ci = wilson(hits, paths.size());
  c.rhs = e + static_cast<double>(hits) / static_cast<double>(paths.size());
  c.rhs_ci_lo = e + ci.lo;
  c.rhs_ci_hi = e + ci.hi;
  finish(c);
  return c;
}

InequalityCheck check_hilbert_inequality(std::span<const PathSummary> paths, double x, double y,
                                         InequalityVariant variant) {
  require_paths(paths.size());
  require_grid(x, y);
  InequalityCheck c{x, y};
  fill_lhs(paths, x, c);
  const double e = 4.0 * std::exp(-(x * x) / (y * y));
  if (variant == InequalityVariant::kA2) {
    std::uint64_t hits = 0;
    for (const auto& p : paths) hits += p.quad > y * y / 8.0 ? 1 : 0;
    const Interval ci = wilson(hits, paths.size());
    c.rhs = e + 2.0 * static_cast<double>(hits) / static_cast<double>(paths.size());
    c.rhs_ci_lo = e + 2.0 * ci.lo;
    c.rhs_ci_hi = e + 2.0 * ci.hi;
  } else if (variant == InequalityVariant::kA3) {
    std::vector<double> w(paths.size()), z(paths.size());
    for (std::size_t r = 0; r < paths.size(); ++r) {
      if (!paths[r].f0_measurable)
        throw PreconditionError(
            "A3 inequality: conditional second moments must be F_0-measurable");
      w[r] = std::sqrt(paths[r].sum_sq);
      // Pathwise integral int_1^inf u 1{w > yu/8} du.
      const double u = std::max(1.0, 8.0 * w[r] / y);
      z[r] = 0.5 * (u * u - 1.0);
    }
    const TailIntegral ti =
        tail_integral(TailOracle::empirical(std::move(w)), y / 8.0, [](double u) { return u; });
    const MeanSe ms = mean_se(z);
    c.rhs = e + 4.0 * ti.value;
    c.rhs_ci_lo = e + 4.0 * std::max(0.0, ti.value - kZ95 * ms.se);
    c.rhs_ci_hi = e + 4.0 * (ti.value + kZ95 * ms.se);
  } else {
    throw InvalidSpecError("check_hilbert_inequality: variant must be A2 or A3");
  }
  finish(c);
  return c;
}

InequalityCheck check_conv_tail_lemma(std::span<const double> xs, std::span<const double> ys,
                                      double t) {
  if (xs.size() != ys.size() || xs.empty())
    throw DimensionError("conv lemma: X and Y samples must be paired and nonempty");
  if (!(t > 0.0)) throw InvalidSpecError("conv lemma: t must be positive");
  InequalityCheck c{t, 0.0};
  std::uint64_t hits = 0;
  for (double v : xs) hits += v > t ? 1 : 0;
  c.lhs = static_cast<double>(hits) / static_cast<double>(xs.size());
  const Interval ci = wilson(hits, xs.size());
  c.lhs_ci_lo = ci.lo;
  c.lhs_ci_hi = ci.hi;
  std::vector<double> z(ys.size());
  for (std::size_t r = 0; r < ys.size(); ++r) z[r] = std::max(0.0, 4.0 * ys[r] / t - 1.0);
  const TailIntegral ti = tail_integral(TailOracle::empirical({ys.begin(), ys.end()}), t / 4.0,
                                        [](double) { return 1.0; });
  const MeanSe ms = mean_se(z);
  c.rhs = ti.value;
  c.rhs_ci_lo = std::max(0.0, ti.value - kZ95 * ms.se);
  c.rhs_ci_hi = ti.value + kZ95 * ms.se;
  finish(c);
  return c;
}

void conv_pair(std::span<const PathSummary> paths, std::vector<double>& xs,
               std::vector<double>& ys) {
  xs.resize(paths.size());
  ys.resize(paths.size());
  for (std::size_t r = 0; r < paths.size(); ++r) {
    xs[r] = paths[r].quad;
    ys[r] = 2.0 * paths[r].sum_sq;
  }
}

InequalityReport verify_grid(std::span<const PathSummary> paths, InequalityVariant variant,
                             std::span<const double> x_grid, std::span<const double> y_grid) {
  InequalityReport rep;
  rep.variant = variant;
  if (variant == InequalityVariant::kConv) {
    std::vector<double> xs, ys;
    conv_pair(paths, xs, ys);
    for (double t : x_grid) rep.entries.push_back(check_conv_tail_lemma(xs, ys, t));
  } else {
    for (double x : x_grid) {
      for (double y : y_grid) {
        rep.entries.push_back(variant == InequalityVariant::kReal
                                  ? check_real_inequality(paths, x, y)
                                  : check_hilbert_inequality(paths, x, y, variant));
      }
    }
  }
  for (const auto& e : rep.entries) rep.violations += e.violated ? 1 : 0;
  return rep;
}

}  // namespace ustat
