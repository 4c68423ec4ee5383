#pragma once

// Replication engine and the Monte Carlo experiments built on it. Replica r
// draws its data from substream r (lane 0), decoupled rows from lanes
// 1..m and sampling designs from lane kDesignLane, so every result is a
// pure function of (seed, r) and independent of the worker count.

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ustatlab/distributions.hpp"
#include "ustatlab/kernels.hpp"
#include "ustatlab/stats.hpp"
#include "ustatlab/ustats.hpp"

namespace ustat {

inline constexpr std::uint32_t kDataLane = 0;
inline constexpr std::uint32_t kDesignLane = 100;

enum class Statistic {
  kComplete,
  kRunningMax,
  kDecoupled,
  kDecoupledRunningMax,
  kIncomplete,
  kIncompleteIndicator,
};

std::string to_string(Statistic s);
std::optional<Statistic> parse_statistic(const std::string& name);

struct ReplicateSpec {
  KernelSpec kernel;
  SamplerSpec law;
  std::size_t n = 0;
  std::size_t replicas = 10'000;
  std::uint64_t seed = 0;
  int threads = 1;
  Statistic statistic = Statistic::kComplete;
  /// Required by the incomplete statistics.
  std::optional<SamplingDesign> design;
  /// Keep the full statistic vectors (not available for running maxima).
  bool keep_values = false;
  std::uint64_t cap = kTupleCap;
};

struct ReplicateResult {
  /// ||U|| per replica, or the running maximum for the running-max kinds.
  std::vector<double> norms;
  std::vector<std::vector<double>> values;
  /// Summands with multiplicity.
  std::vector<std::uint64_t> terms;
  /// Distinct tuples used (equals terms for complete statistics).
  std::vector<std::uint64_t> distinct;
  std::size_t empty_selections = 0;
  /// Spot checks of the declared sup-bound and how many failed.
  std::size_t sup_bound_checks = 0;
  std::size_t sup_bound_violations = 0;
};

/// Throws InvalidSpecError on a bad spec; BudgetError from a replica aborts
/// the run and names the replica.
ReplicateResult replicate(const ReplicateSpec& spec);

/// Stand-in constants for the non-constructive bound
///   A exp(-(x/y)^{2/m}) + B int_1^inf u (1 + log u)^p P(T > C y u) du.
struct BoundEnvelope {
  double a = 1.0;
  double b = 1.0;
  double c = 1.0;
  double y = 1.0;
  int m = 1;
  double log_power = 1.0;

  /// m(m+1)/2, the larger of the two exponents appearing for (1 + log u).
  static double default_log_power(int m) { return m * (m + 1) / 2.0; }
  static BoundEnvelope with_defaults(double a, double b, double c, double y, int m);
  void validate() const;
};

struct EnvelopeValue {
  double value = 0.0;
  double exp_term = 0.0;
  double integral_term = 0.0;
  bool diverged = false;
};

EnvelopeValue envelope_eval(const BoundEnvelope& env, double x, const TailOracle& tail,
                            std::size_t resolution = 1);

/// Order-d form: A exp(-(x/y)^{2/d}) + B sum_{k=d}^m int_1^inf
/// P(H_k > C u N^{(k-d)/2} x^{1-k/d} y^{k/d}) u (1 + log u)^p du, where
/// h_laws[k - d] is the law of H_k = E[||h|| | xi_1..xi_k].
EnvelopeValue theorem2_envelope(const BoundEnvelope& env, int d, double x, double big_n,
                                const std::vector<TailOracle>& h_laws,
                                std::size_t resolution = 1);

/// Law of H_k = E[||h(xi_1..xi_m)|| | xi_1..xi_k] on a finite support.
TailOracle conditional_norm_law(const KernelSpec& k, const FiniteDistribution& dist, int order,
                                std::uint64_t cap = kExpectationCap);

// Tail scans.

struct TailScanConfig {
  ReplicateSpec rep;
  std::vector<double> x_grid;
  /// Degeneracy order; detected exactly for finite laws when absent.
  std::optional<int> degeneracy;
  /// Scan the running maximum over n = m..N (true) or the final U_N.
  bool running_max = true;
  double window_lo = 1e-3;
  double window_hi = 0.5;
  std::size_t min_fit_points = 5;
  std::optional<BoundEnvelope> envelope;
};

struct TailPoint {
  double x = 0.0;
  double p_hat = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  /// Envelope at the unnormalized threshold; NaN without an envelope.
  double envelope = std::numeric_limits<double>::quiet_NaN();
};

struct TailScanReport {
  std::vector<TailPoint> points;
  bool fit_available = false;
  /// Slope of log(-log p) against log x.
  double beta = std::numeric_limits<double>::quiet_NaN();
  LinearFit fit;
  double window_lo = 0.0;
  double window_hi = 0.0;
  std::size_t replicas = 0;
  int m = 0;
  int d = 0;
  /// Statistic divided by N^{m - d/2}.
  double scale = 1.0;
  std::string normalization;
  std::size_t sup_bound_violations = 0;
};

/// Requires a centered kernel (E h = 0) of known degeneracy order.
TailScanReport tail_scan(const TailScanConfig& cfg);

/// Fit of log(-log p) on log x over points with p in [lo, hi]; needs at
/// least `min_points` such points.
void fit_tail_exponent(TailScanReport& rep, std::size_t min_points = 5);

// Incomplete U-statistics across (n, design) cells.

struct ScalingCell {
  std::size_t n = 0;
  SamplingDesign design;
};

struct ScalingConfig {
  KernelSpec kernel;
  SamplerSpec law;
  std::optional<int> degeneracy;
  std::vector<ScalingCell> cells;
  std::size_t replicas = 10'000;
  std::uint64_t seed = 0;
  int threads = 1;
  double q = 0.9;
};

/// sqrt(N) sqrt(min{N, n^{m-d}}).
double replacement_normalization(double big_n, double n, int m, int d);
/// n^m sqrt(p) sqrt(min{p, n^{-d}}).
double bernoulli_normalization(double p, double n, int m, int d);

struct ScalingRow {
  std::size_t n = 0;
  SamplingDesign design;
  int m = 0;
  int d = 0;
  double normalization = 0.0;
  /// q-quantile of ||sum with multiplicity|| over nonempty selections.
  double quantile = 0.0;
  double normalized = 0.0;
  /// q-quantile of the 0/1-weight sum, each replica divided by the
  /// normalization at its own count of distinct selected tuples.
  double normalized_indicator = 0.0;
  double mean_distinct = 0.0;
  std::size_t empty = 0;
  /// Design unbiasedness on one fixed sample: mean of U_inc / E|selection|
  /// against U / C(n, m), coordinate-wise.
  double unbiased_mean = 0.0;
  double unbiased_target = 0.0;
  double unbiased_se = 0.0;
  /// max over coordinates of |mean - target| / se (0 when exact).
  double unbiased_z = 0.0;
  bool unbiased_ok = false;
};

std::vector<ScalingRow> incomplete_scaling_experiment(const ScalingConfig& cfg);

// Decoupling comparison.

struct DecoupleConfig {
  KernelSpec kernel;
  SamplerSpec law;
  std::size_t n = 0;
  std::size_t replicas = 10'000;
  std::uint64_t seed = 0;
  int threads = 1;
  std::vector<double> x_grid;
  double k_max = 1e6;
};

struct DecouplePoint {
  double x = 0.0;
  double p_complete = 0.0;
  double p_decoupled = 0.0;
  bool usable = false;
};

struct DecoupleReport {
  std::vector<DecouplePoint> points;
  std::size_t usable_points = 0;
  /// False when the usable grid is empty.
  bool k_defined = false;
  /// Smallest K >= 1 with P(||U|| > x) <= K P(K ||U^dec|| > x) on the usable
  /// grid; infinity when even k_max fails.
  double fitted_k = std::numeric_limits<double>::quiet_NaN();
  bool domination_holds = false;
  std::size_t replicas = 0;
};

DecoupleReport decouple_compare(const DecoupleConfig& cfg);

/// Same fit from precomputed norms.
DecoupleReport fit_decoupling(std::vector<double> complete_norms,
                              std::vector<double> decoupled_norms,
                              const std::vector<double>& x_grid, double k_max = 1e6);

}  // namespace ustat
