#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ustatlab/hilbert.hpp"
#include "ustatlab/rng.hpp"

namespace ustat {

/// Default cap on the number of kernel evaluations an exact enumeration may
/// perform.
inline constexpr std::uint64_t kExpectationCap = 10'000'000;

/// Law with finitely many atoms. Atoms are distinct points of a common space
/// and probabilities sum to one within 1e-12.
class FiniteDistribution {
 public:
  FiniteDistribution(std::vector<HilbertPoint> atoms, std::vector<double> probs);

  static FiniteDistribution point_mass(HilbertPoint atom);
  /// Uniform on {-1, +1}.
  static FiniteDistribution rademacher();
  /// Uniform on k equally spaced points of [-1, 1] (k >= 2); k = 3 gives
  /// {-1, 0, 1}.
  static FiniteDistribution uniform_grid(int k);

  std::size_t size() const noexcept { return atoms_.size(); }
  const std::vector<HilbertPoint>& atoms() const noexcept { return atoms_; }
  const std::vector<double>& probs() const noexcept { return probs_; }
  const SpacePtr& space() const noexcept { return atoms_.front().space(); }

  /// Index of an atom equal (coordinate-wise) to p, if any.
  std::optional<std::size_t> find(const HilbertPoint& p) const;

  /// Inverse-CDF draw of an atom index.
  std::size_t draw_index(CounterRng& rng) const;

 private:
  std::vector<HilbertPoint> atoms_;
  std::vector<double> probs_;
  std::vector<double> cdf_;
};

/// Which law generates the sample xi_1, ..., xi_n.
struct SamplerSpec {
  enum class Kind { kFinite, kRademacher, kUniformGrid, kDiscretizedGaussian };

  Kind kind = Kind::kRademacher;
  std::optional<FiniteDistribution> finite;  // kFinite only
  int grid_points = 3;                       // kUniformGrid only
  std::size_t dim = 1;                       // kDiscretizedGaussian only
  std::uint64_t stream_id = 0;

  static SamplerSpec from_finite(FiniteDistribution dist);
  static SamplerSpec rademacher();
  static SamplerSpec uniform_grid(int k);
  static SamplerSpec discretized_gaussian(std::size_t dim);

  /// Throws InvalidSpecError on bad parameters.
  void validate() const;
  /// Every kind except discretized-gaussian has finite support.
  std::optional<FiniteDistribution> as_finite() const;
  SpacePtr space() const;
  std::string name() const;
};

/// n i.i.d. draws from the substream (seed, stream). Deterministic.
std::vector<HilbertPoint> draw_iid(const SamplerSpec& spec, std::size_t n,
                                   std::uint64_t seed, std::uint64_t stream);
/// Same, consuming an existing generator.
std::vector<HilbertPoint> draw_iid(const SamplerSpec& spec, std::size_t n,
                                   CounterRng& rng);

using PointFunction = std::function<HilbertPoint(std::span<const HilbertPoint>)>;

/// E f(X_1, ..., X_j) for X_i i.i.d. ~ dist, by enumerating all |atoms|^j
/// tuples. Throws BudgetError above `cap` evaluations.
HilbertPoint exact_expectation(const PointFunction& f, const FiniteDistribution& dist,
                               int arity, std::uint64_t cap = kExpectationCap);

/// |atoms|^arity, saturating at UINT64_MAX.
std::uint64_t enumeration_size(std::size_t atoms, int arity) noexcept;

}  // namespace ustat
