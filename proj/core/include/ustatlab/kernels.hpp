#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ustatlab/distributions.hpp"
#include "ustatlab/hilbert.hpp"

namespace ustat {

/// Borrowed argument list for a kernel evaluation.
using ArgRefs = std::span<const HilbertPoint* const>;
/// Writes h(args) into `out` (length = codomain dim). Must be pure.
using KernelFn = std::function<void(ArgRefs args, std::span<double> out)>;

/// Arity-m map h: S^m -> H plus metadata. Immutable; safe to share between
/// threads.
class KernelSpec {
 public:
  KernelSpec(std::string name, int arity, SpacePtr codomain, KernelFn fn,
             bool symmetric, std::optional<double> sup_bound = std::nullopt,
             std::optional<int> declared_degeneracy = std::nullopt);

  const std::string& name() const noexcept { return name_; }
  int arity() const noexcept { return arity_; }
  const SpacePtr& codomain() const noexcept { return codomain_; }
  std::size_t out_dim() const noexcept { return codomain_->dim(); }
  bool symmetric() const noexcept { return symmetric_; }
  /// sup ||h|| when known.
  const std::optional<double>& sup_bound() const noexcept { return sup_bound_; }
  const std::optional<int>& declared_degeneracy() const noexcept {
    return declared_degeneracy_;
  }

  /// Throws DimensionError on arity mismatch.
  HilbertPoint eval(std::span<const HilbertPoint> args) const;
  HilbertPoint eval(ArgRefs args) const;
  /// Hot-path evaluation; no arity check.
  void eval_into(ArgRefs args, std::span<double> out) const { fn_(args, out); }

  KernelSpec with_sup_bound(double bound) const;
  KernelSpec with_declared_degeneracy(int order) const;

 private:
  std::string name_;
  int arity_;
  SpacePtr codomain_;
  KernelFn fn_;
  bool symmetric_;
  std::optional<double> sup_bound_;
  std::optional<int> declared_degeneracy_;
};

// Built-in kernels.

/// Gini mean difference: h(u, v) = ||u - v|| (real-valued).
KernelSpec gini_kernel();
/// Spatial sign: h(u, v) = (u - v) / ||u - v||, 0 when u = v. Values in `space`.
KernelSpec spatial_sign_kernel(SpacePtr space);
/// h(u, v) = <u, v> (real-valued).
KernelSpec product_kernel();
/// h(x) = x; values in `space`.
KernelSpec identity_kernel(SpacePtr space);
/// h = 0.
KernelSpec zero_kernel(int arity, SpacePtr codomain = HilbertSpace::real_line());
/// x -> (1{x <= t_j} - F(t_j))_j on the midpoint grid t_j = (j + 1/2) / grid
/// of [0, 1], as an element of discretized L^2. `cdf_on_grid` holds F(t_j).
KernelSpec empirical_indicator_kernel(std::vector<double> cdf_on_grid);
/// F(t_j) for a scalar finite law on the midpoint grid with `grid` cells.
std::vector<double> cdf_on_midpoint_grid(const FiniteDistribution& dist, std::size_t grid);

/// Kernel averaging h over all m! argument orders. Arguments are put in a
/// canonical order first so the result is bit-exactly permutation invariant.
/// Throws PreconditionError for m > 6.
KernelSpec symmetrize(const KernelSpec& k);

/// E ||h(fixed_1..fixed_j, X_{j+1}..X_m)|| with X ~ dist, by enumeration.
double conditional_norm_expectation(const KernelSpec& k, const FiniteDistribution& dist,
                                    std::span<const HilbertPoint> fixed,
                                    std::uint64_t cap = kExpectationCap);

/// True when ||h(args)|| respects the declared sup-bound (or none is
/// declared). Relative slack 1e-12.
bool within_sup_bound(const KernelSpec& k, std::span<const double> value);

/// Maximum |h(args) - h(sigma args)| over all argument orders at the probe;
/// 0 for an exactly symmetric kernel.
double symmetry_defect(const KernelSpec& k, std::span<const HilbertPoint> args);

}  // namespace ustat
