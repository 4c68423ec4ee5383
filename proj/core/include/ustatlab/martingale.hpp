#pragma once

// Simulated martingale difference sequences and Monte Carlo checks of
// maximal inequalities with explicit constants:
//
//   real: P(max|S_k| > x) <= 2 exp(-x^2/y^2) + P(sum(D^2 + E[D^2|F]) > y^2/2)
//   A2:   P(max||S_k|| > x) <= 4 exp(-x^2/y^2) + 2 P(sum(||D||^2 + E[||D||^2|F]) > y^2/8)
//   A3:   P(max||S_k|| > x) <= 4 exp(-x^2/y^2) + 4 int_1^inf u P(sqrt(sum ||D||^2) > yu/8) du
//   conv: P(X > t) <= int_1^inf P(Y > tv/4) dv   for X <=_conv Y

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ustatlab/hilbert.hpp"
#include "ustatlab/rng.hpp"

namespace ustat {

enum class MdsGenerator { kBoundedSigns, kGaussianCoords, kF0RandomizedScale };

std::string to_string(MdsGenerator g);
std::optional<MdsGenerator> parse_generator(const std::string& name);

struct MartingalePath {
  std::vector<HilbertPoint> increments;
  /// E[||D_j||^2 | F_{j-1}] for each j.
  std::vector<double> cond_second;
  /// Conditional second moments are F_0-measurable (constant along the path).
  bool f0_measurable = false;

  /// Throws DimensionError / PreconditionError when the invariants fail.
  void validate() const;
};

/// bounded-signs: D_j = eps_j e_{j mod dim} / sqrt(w), norm 1.
/// gaussian-coords: i.i.d. N(0, 1) coordinates.
/// f0-randomized-scale: a scale s ~ U[0.5, 1.5) drawn first, then
/// D_j = s (eps_{j,1}, ..., eps_{j,dim}) / sqrt(sum w), so ||D_j|| = s.
MartingalePath simulate_mds(MdsGenerator g, std::size_t n, const SpacePtr& space,
                            CounterRng& rng);
MartingalePath simulate_mds(MdsGenerator g, std::size_t n, const SpacePtr& space,
                            std::uint64_t seed, std::uint64_t stream);

/// Per-path quantities every check needs.
struct PathSummary {
  double max_partial = 0.0;  // max_k ||S_k||
  double quad = 0.0;         // sum (||D_j||^2 + E[||D_j||^2 | F_{j-1}])
  double sum_sq = 0.0;       // sum ||D_j||^2
  bool f0_measurable = false;
  bool real = false;         // one-dimensional space
};

PathSummary summarize(const MartingalePath& path);

/// R independent paths; path r uses substream r. Identical for any thread count.
std::vector<PathSummary> simulate_summaries(MdsGenerator g, std::size_t n,
                                            const SpacePtr& space, std::size_t replicas,
                                            std::uint64_t seed, int threads = 1);

enum class InequalityVariant { kReal, kA2, kA3, kConv };

std::string to_string(InequalityVariant v);
std::optional<InequalityVariant> parse_variant(const std::string& name);

/// One grid point. For the conv lemma x holds t and y is unused (0).
struct InequalityCheck {
  double x = 0.0;
  double y = 0.0;
  double lhs = 0.0;
  double lhs_ci_lo = 0.0;
  double lhs_ci_hi = 0.0;
  double rhs = 0.0;
  double rhs_ci_lo = 0.0;
  double rhs_ci_hi = 0.0;
  /// lhs_ci_lo > rhs_ci_hi: the lower 95% bound of the left side exceeds
  /// the upper 95% bound of the right side.
  bool violated = false;
};

inline constexpr std::size_t kMinInequalityPaths = 1000;

InequalityCheck check_real_inequality(std::span<const PathSummary> paths, double x, double y);
/// variant is kA2 or kA3. A3 throws PreconditionError unless every path has
/// F_0-measurable conditional second moments.
InequalityCheck check_hilbert_inequality(std::span<const PathSummary> paths, double x, double y,
                                         InequalityVariant variant);
/// X and Y paired samples of equal length.
InequalityCheck check_conv_tail_lemma(std::span<const double> xs, std::span<const double> ys,
                                      double t);

/// X = sum(||D||^2 + E[||D||^2|F]) and Y = 2 sum ||D||^2 per path.
void conv_pair(std::span<const PathSummary> paths, std::vector<double>& xs,
               std::vector<double>& ys);

struct InequalityReport {
  InequalityVariant variant = InequalityVariant::kReal;
  std::vector<InequalityCheck> entries;
  std::size_t violations = 0;
};

/// Every (x, y) pair of the grid; the conv lemma uses x_grid as the t-grid.
InequalityReport verify_grid(std::span<const PathSummary> paths, InequalityVariant variant,
                             std::span<const double> x_grid, std::span<const double> y_grid);

}  // namespace ustat
