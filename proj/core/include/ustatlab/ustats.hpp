#pragma once

// U-statistic estimators over Inc^m_n. Every sum runs in lexicographic tuple
// order so results are reproducible bit for bit.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ustatlab/combinatorics.hpp"
#include "ustatlab/hilbert.hpp"
#include "ustatlab/kernels.hpp"
#include "ustatlab/rng.hpp"

namespace ustat {

/// sum over Inc^m_n of h(xi_{i_1}, ..., xi_{i_m}).
HilbertPoint complete(const KernelSpec& k, std::span<const HilbertPoint> sample,
                      std::uint64_t cap = kTupleCap);

struct RunningMax {
  /// ||U_n|| for n = m, ..., N (index 0 is n = m).
  std::vector<double> norms;
  double max = 0.0;
  /// Sample size at which the maximum is first attained.
  std::size_t argmax_n = 0;
};

/// Prefix norms ||U_n||, m <= n <= N. Adding index n contributes exactly the
/// tuples with i_m = n, so the total cost is C(N, m) evaluations.
RunningMax running_max(const KernelSpec& k, std::span<const HilbertPoint> sample,
                       std::uint64_t cap = kTupleCap);

/// Rows xi^(1), ..., xi^(m): independent copies of the sample.
struct DecoupledSample {
  std::vector<std::vector<HilbertPoint>> rows;

  /// Throws DimensionError unless there are m rows of equal length.
  void validate(int m) const;
  std::size_t length() const { return rows.empty() ? 0 : rows.front().size(); }
};

/// sum over Inc^m_n of h(xi^(1)_{i_1}, ..., xi^(m)_{i_m}).
HilbertPoint decoupled(const KernelSpec& k, const DecoupledSample& d, std::size_t n,
                       std::uint64_t cap = kTupleCap);

/// Running maximum of the decoupled statistic over n = m..N.
RunningMax decoupled_running_max(const KernelSpec& k, const DecoupledSample& d,
                                 std::uint64_t cap = kTupleCap);

/// Per-tuple bounded operators T_i on H restricted to scalar multiples of
/// the identity or diagonal matrices in the coordinate basis. Tuples without
/// an explicit entry use the default operator.
class WeightScheme {
 public:
  enum class Kind { kScalar, kDiagonal };

  static WeightScheme scalar(double default_value = 0.0);
  static WeightScheme identity() { return scalar(1.0); }
  static WeightScheme diagonal(std::vector<double> default_diag);

  Kind kind() const noexcept { return kind_; }
  /// Diagonal length (1 for scalar schemes).
  std::size_t width() const noexcept { return default_.size(); }

  void set(const IndexTuple& t, double c);
  void set(const IndexTuple& t, std::vector<double> diag);

  /// Scalar weight (kScalar) or diagonal (kDiagonal) for a tuple.
  std::span<const double> at(const IndexTuple& t) const;
  /// ||T_i||_{B(H)}: |c| or max |d_j|.
  double operator_norm(const IndexTuple& t) const;
  /// acc += T_i(value).
  void apply_add(const IndexTuple& t, std::span<const double> value,
                 std::span<double> acc) const;

  const std::map<IndexTuple, std::vector<double>>& explicit_entries() const noexcept {
    return values_;
  }

 private:
  WeightScheme(Kind kind, std::vector<double> def) : kind_(kind), default_(std::move(def)) {}

  Kind kind_;
  std::vector<double> default_;
  std::map<IndexTuple, std::vector<double>> values_;
};

/// a_i^{(n,k)} = sum over j in Inc^m_n with {i} subset of {j} of T_j, for
/// every i in Inc^k_n. Values are length-1 (scalar) or diagonal vectors.
std::map<IndexTuple, std::vector<double>> weight_aggregate(const WeightScheme& w, int m,
                                                          std::uint64_t n, int k,
                                                          std::uint64_t cap = kTupleCap);

/// sum over Inc^m_n of T_i(h(xi_i)).
HilbertPoint weighted(const KernelSpec& k, const WeightScheme& w,
                      std::span<const HilbertPoint> sample, std::uint64_t cap = kTupleCap);

/// Random selection of tuples for incomplete U-statistics.
struct SamplingDesign {
  enum class Kind { kWithoutReplacement, kWithReplacement, kBernoulli };

  Kind kind = Kind::kWithReplacement;
  std::uint64_t draws = 0;  // N for the two replacement designs
  double p = 1.0;           // p_n for Bernoulli

  static SamplingDesign without_replacement(std::uint64_t n_draws);
  static SamplingDesign with_replacement(std::uint64_t n_draws);
  static SamplingDesign bernoulli(double p);

  /// Throws InvalidSpecError; needs C(n, m) for the without-replacement bound.
  void validate(int m, std::uint64_t n) const;
  /// Expected number of selected tuples (with multiplicity).
  double expected_size(int m, std::uint64_t n) const;
  std::string to_string() const;
};

struct SelectionEntry {
  IndexTuple tuple;
  std::uint64_t count = 1;
};

/// Multiset of tuples in lexicographic order.
struct Selection {
  int m = 0;
  std::uint64_t n = 0;
  std::vector<SelectionEntry> entries;

  bool empty() const noexcept { return entries.empty(); }
  /// Sum of multiplicities.
  std::uint64_t total() const noexcept;
  /// Number of distinct tuples.
  std::size_t distinct() const noexcept { return entries.size(); }
  /// Every tuple of Inc^m_n once.
  static Selection all(int m, std::uint64_t n, std::uint64_t cap = kTupleCap);
};

/// Draws a selection independently of the data. Without replacement: N
/// distinct tuples, uniform over N-subsets. With replacement: N i.i.d.
/// uniform tuples, multiplicities counted. Bernoulli: each tuple kept
/// independently with probability p.
Selection draw_design(const SamplingDesign& design, int m, std::uint64_t n,
                      CounterRng& rng, std::uint64_t cap = kTupleCap);

struct IncompleteResult {
  HilbertPoint value;
  std::uint64_t terms = 0;
  /// Set when the selection was empty (value is then the zero vector).
  bool empty = false;
};

/// sum over the selection (with multiplicity) of h(xi_i).
IncompleteResult incomplete(const KernelSpec& k, std::span<const HilbertPoint> sample,
                            const Selection& selection);

/// Same sum with 0/1 weights: each distinct selected tuple counted once.
IncompleteResult incomplete_indicator(const KernelSpec& k, std::span<const HilbertPoint> sample,
                                      const Selection& selection);

/// |max_n ||U_n|| - ||U_N(h~)||_B| where h~_i = (h 1{i_m <= n})_{n <= N} takes
/// values in H^N with the max-norm. The stacked side enumerates Inc^m_N once
/// and feeds every component directly.
double running_max_embedding_check(const KernelSpec& k, std::span<const HilbertPoint> sample,
                                   std::uint64_t cap = kTupleCap);

}  // namespace ustat
