#pragma once

// Hoeffding projections h_k of a symmetric kernel under a finite law:
//
//   h_k(s_1..s_k) = sum_{j=0}^k (-1)^{k-j} sum_{u in Inc^j_k} g_j(s_{u_1}, ..., s_{u_j})
//   g_j(t_1..t_j) = E h(t_1, ..., t_j, X_{j+1}, ..., X_m)
//
// g_j values on the support are memoized per projector and shared by copies.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "ustatlab/distributions.hpp"
#include "ustatlab/kernels.hpp"
#include "ustatlab/ustats.hpp"

namespace ustat {

class ProjectedKernel {
 public:
  /// Throws PreconditionError for an asymmetric base, InvalidSpecError when
  /// k lies outside [0, m], BudgetError when |atoms|^m exceeds `cap`.
  ProjectedKernel(KernelSpec base, int k, FiniteDistribution dist,
                  std::uint64_t cap = kExpectationCap);

  int order() const noexcept { return k_; }
  const KernelSpec& base() const noexcept;
  const FiniteDistribution& dist() const noexcept;

  /// h_k(args); args.size() must equal k. For k = 0 this is E h.
  HilbertPoint eval(std::span<const HilbertPoint> args) const;
  void eval_into(ArgRefs args, std::span<double> out) const;

  /// g_j(args) = E h(args, X_{j+1..m}), j = args.size() <= m.
  void partial_expectation(ArgRefs args, std::span<double> out) const;

  /// Projector of another order sharing this one's cache.
  ProjectedKernel with_order(int k) const;

  /// h_k as a kernel of arity k (k >= 1) sharing this projector's cache.
  KernelSpec as_kernel() const;

  /// max over (k-1)-tuples of atoms of ||E h_k(s_1..s_{k-1}, X)||; zero for
  /// every k >= 1 in exact arithmetic.
  double conditional_mean_defect() const;

  struct State;

 private:
  ProjectedKernel(std::shared_ptr<State> state, int k);

  std::shared_ptr<State> state_;
  int k_;
};

inline ProjectedKernel project(const KernelSpec& base, int k, const FiniteDistribution& dist) {
  return ProjectedKernel(base, k, dist);
}

struct DegeneracyReport {
  /// Smallest k >= 1 with residual[k] > tol; m when none.
  int order = 0;
  /// residual[k] = max over the support of ||h_k||, k = 0..m.
  std::vector<double> residual;
  double tol = 0.0;
  /// True when ||h_0|| = ||E h|| <= tol.
  bool centered = false;
  /// True when no k <= m exceeds tol.
  bool fully_vanishing = false;
};

inline constexpr double kDegeneracyTol = 1e-9;

DegeneracyReport degeneracy_order(const KernelSpec& base, const FiniteDistribution& dist,
                                  double tol = kDegeneracyTol);

/// ||U_{m,n}(h) - sum_{k=0}^m C(n-k, m-k) U_{k,n}(h_k)|| on the given sample,
/// with U_{0,n}(h_0) = h_0. C(n-k, m-k) = C(m,k) C(n,m) / C(n,k).
double decomposition_check(const KernelSpec& base, const FiniteDistribution& dist,
                           std::span<const HilbertPoint> sample,
                           std::uint64_t cap = kTupleCap);

/// Both sides of the weighted decomposition for scalar weights:
/// sum T_i h(xi_i) and sum_{k=0}^m sum_{Inc^k_n} a_i^{(n,k)} h_k(xi_i), with
/// a^{(n,0)} = sum T_j. Returns the norm of the difference.
double weighted_decomposition_check(const KernelSpec& base, const FiniteDistribution& dist,
                                    const WeightScheme& w,
                                    std::span<const HilbertPoint> sample,
                                    std::uint64_t cap = kTupleCap);

// Monte Carlo plug-in for laws without finite support. All g_j share one
// auxiliary sample of `draws` m-tuples, so h_k(s) is a plain mean of
// per-draw values and carries a standard error.

struct McValue {
  HilbertPoint value;
  /// sqrt(sum of squared coordinate standard errors) in the codomain norm.
  double se = 0.0;
};

class McProjector {
 public:
  McProjector(KernelSpec base, const SamplerSpec& law, std::size_t draws = 10'000,
              std::uint64_t seed = 0);

  McValue eval(int k, std::span<const HilbertPoint> args) const;

 private:
  KernelSpec base_;
  std::vector<std::vector<HilbertPoint>> aux_;  // aux_[r] holds m points
};

/// Order detection in plug-in mode: h_k counts as zero at a probe when
/// ||h_k|| <= 4 SE. Probes are k-tuples drawn from the law.
DegeneracyReport degeneracy_order_mc(const KernelSpec& base, const SamplerSpec& law,
                                     std::size_t probes = 20, std::size_t draws = 10'000,
                                     std::uint64_t seed = 0);

}  // namespace ustat
