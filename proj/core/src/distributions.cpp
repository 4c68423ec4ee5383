#include "ustatlab/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ustatlab/error.hpp"

namespace ustat {

FiniteDistribution::FiniteDistribution(std::vector<HilbertPoint> atoms,
                                       std::vector<double> probs)
    : atoms_(std::move(atoms)), probs_(std::move(probs)) {
  if (atoms_.empty()) throw InvalidSpecError("finite distribution: no atoms");
  if (atoms_.size() != probs_.size())
    throw InvalidSpecError("finite distribution: atoms and probs differ in length");
  double total = 0.0;
  for (double p : probs_) {
    if (!std::isfinite(p) || p < 0.0)
      throw InvalidSpecError("finite distribution: probabilities must be >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw InvalidSpecError("finite distribution: probabilities must sum to 1");
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (!same_space(atoms_[i].space(), atoms_[0].space()))
      throw DimensionError("finite distribution: atoms live in different spaces");
    for (std::size_t j = 0; j < i; ++j) {
      if (atoms_[i] == atoms_[j])
        throw InvalidSpecError("finite distribution: atoms must be distinct");
    }
  }
  cdf_.resize(probs_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    acc += probs_[i];
    cdf_[i] = acc;
  }
}

FiniteDistribution FiniteDistribution::point_mass(HilbertPoint atom) {
  return FiniteDistribution({std::move(atom)}, {1.0});
}

FiniteDistribution FiniteDistribution::rademacher() { return uniform_grid(2); }

FiniteDistribution FiniteDistribution::uniform_grid(int k) {
  if (k < 2) throw InvalidSpecError("uniform-grid: k must be >= 2");
  std::vector<HilbertPoint> atoms;
  std::vector<double> probs(static_cast<std::size_t>(k), 1.0 / k);
  for (int i = 0; i < k; ++i)
    atoms.push_back(HilbertPoint::scalar(-1.0 + 2.0 * i / (k - 1)));
  // Make the probabilities sum to one exactly in floating point.
  double rest = 1.0;
  for (int i = 0; i + 1 < k; ++i) rest -= probs[i];
  probs.back() = rest;
  return FiniteDistribution(std::move(atoms), std::move(probs));
}

std::optional<std::size_t> FiniteDistribution::find(const HilbertPoint& p) const {
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (atoms_[i] == p) return i;
  }
  return std::nullopt;
}

std::size_t FiniteDistribution::draw_index(CounterRng& rng) const {
  const double u = rng.uniform();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) {
    // u landed in the rounding gap above the last partial sum; pick the last
    // atom carrying mass.
    for (std::size_t i = probs_.size(); i-- > 0;) {
      if (probs_[i] > 0.0) return i;
    }
  }
  return static_cast<std::size_t>(it - cdf_.begin());
}

SamplerSpec SamplerSpec::from_finite(FiniteDistribution dist) {
  SamplerSpec s;
  s.kind = Kind::kFinite;
  s.finite = std::move(dist);
  return s;
}

SamplerSpec SamplerSpec::rademacher() {
  SamplerSpec s;
  s.kind = Kind::kRademacher;
  return s;
}

SamplerSpec SamplerSpec::uniform_grid(int k) {
  SamplerSpec s;
  s.kind = Kind::kUniformGrid;
  s.grid_points = k;
  s.validate();
  return s;
}

SamplerSpec SamplerSpec::discretized_gaussian(std::size_t dim) {
  SamplerSpec s;
  s.kind = Kind::kDiscretizedGaussian;
  s.dim = dim;
  s.validate();
  return s;
}

void SamplerSpec::validate() const {
  switch (kind) {
    case Kind::kFinite:
      if (!finite) throw InvalidSpecError("sampler: finite kind without a distribution");
      break;
    case Kind::kRademacher:
      break;
    case Kind::kUniformGrid:
      if (grid_points < 2) throw InvalidSpecError("sampler: uniform-grid needs k >= 2");
      break;
    case Kind::kDiscretizedGaussian:
      if (dim < 1) throw InvalidSpecError("sampler: discretized-gaussian needs dim >= 1");
      break;
  }
}

std::optional<FiniteDistribution> SamplerSpec::as_finite() const {
  switch (kind) {
    case Kind::kFinite:
      return finite;
    case Kind::kRademacher:
      return FiniteDistribution::rademacher();
    case Kind::kUniformGrid:
      return FiniteDistribution::uniform_grid(grid_points);
    case Kind::kDiscretizedGaussian:
      return std::nullopt;
  }
  return std::nullopt;
}

SpacePtr SamplerSpec::space() const {
  switch (kind) {
    case Kind::kFinite:
      return finite->space();
    case Kind::kDiscretizedGaussian:
      return HilbertSpace::l2_grid(dim);
    default:
      return HilbertSpace::real_line();
  }
}

std::string SamplerSpec::name() const {
  switch (kind) {
    case Kind::kFinite:
      return "finite";
    case Kind::kRademacher:
      return "rademacher";
    case Kind::kUniformGrid:
      return "uniform-grid";
    case Kind::kDiscretizedGaussian:
      return "discretized-gaussian";
  }
  return "unknown";
}

std::vector<HilbertPoint> draw_iid(const SamplerSpec& spec, std::size_t n,
                                   std::uint64_t seed, std::uint64_t stream) {
  CounterRng rng(seed, stream);
  return draw_iid(spec, n, rng);
}

std::vector<HilbertPoint> draw_iid(const SamplerSpec& spec, std::size_t n,
                                   CounterRng& rng) {
  spec.validate();
  std::vector<HilbertPoint> out;
  out.reserve(n);
  switch (spec.kind) {
    case SamplerSpec::Kind::kRademacher:
      for (std::size_t i = 0; i < n; ++i) out.push_back(HilbertPoint::scalar(rng.sign()));
      break;
    case SamplerSpec::Kind::kUniformGrid: {
      const int k = spec.grid_points;
      for (std::size_t i = 0; i < n; ++i) {
        const auto idx = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
        out.push_back(HilbertPoint::scalar(-1.0 + 2.0 * idx / (k - 1)));
      }
      break;
    }
    case SamplerSpec::Kind::kFinite:
      for (std::size_t i = 0; i < n; ++i)
        out.push_back(spec.finite->atoms()[spec.finite->draw_index(rng)]);
      break;
    case SamplerSpec::Kind::kDiscretizedGaussian: {
      const SpacePtr space = HilbertSpace::l2_grid(spec.dim);
      const auto w = space->weights();
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> c(spec.dim);
        for (std::size_t t = 0; t < spec.dim; ++t) c[t] = rng.normal() * std::sqrt(w[t]);
        out.emplace_back(space, std::move(c));
      }
      break;
    }
  }
  return out;
}

std::uint64_t enumeration_size(std::size_t atoms, int arity) noexcept {
  std::uint64_t total = 1;
  for (int i = 0; i < arity; ++i) {
    if (atoms != 0 && total > std::numeric_limits<std::uint64_t>::max() / atoms)
      return std::numeric_limits<std::uint64_t>::max();
    total *= atoms;
  }
  return total;
}

HilbertPoint exact_expectation(const PointFunction& f, const FiniteDistribution& dist,
                               int arity, std::uint64_t cap) {
  if (arity < 0) throw InvalidSpecError("exact_expectation: negative arity");
  const std::size_t k = dist.size();
  if (enumeration_size(k, arity) > cap)
    throw BudgetError("exact_expectation: " + std::to_string(k) + "^" +
                      std::to_string(arity) + " evaluations exceed the cap of " +
                      std::to_string(cap));
  std::vector<std::size_t> odo(static_cast<std::size_t>(arity), 0);
  std::vector<HilbertPoint> args;
  args.reserve(odo.size());
  std::optional<HilbertPoint> acc;
  while (true) {
    args.clear();
    double weight = 1.0;
    for (std::size_t idx : odo) {
      args.push_back(dist.atoms()[idx]);
      weight *= dist.probs()[idx];
    }
    HilbertPoint value = f(args);
    acc = acc ? axpy(weight, value, *acc) : axpy(weight, value, HilbertPoint(value.space()));
    // Odometer increment, last position fastest.
    std::size_t pos = odo.size();
    while (pos > 0) {
      if (++odo[pos - 1] < k) break;
      odo[pos - 1] = 0;
      --pos;
    }
    if (pos == 0) break;
  }
  return *acc;
}

}  // namespace ustat
