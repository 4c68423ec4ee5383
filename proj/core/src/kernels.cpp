#include "ustatlab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ustatlab/error.hpp"

namespace ustat {

KernelSpec::KernelSpec(std::string name, int arity, SpacePtr codomain, KernelFn fn,
                       bool symmetric, std::optional<double> sup_bound,
                       std::optional<int> declared_degeneracy)
    : name_(std::move(name)),
      arity_(arity),
      codomain_(std::move(codomain)),
      fn_(std::move(fn)),
      symmetric_(symmetric),
      sup_bound_(sup_bound),
      declared_degeneracy_(declared_degeneracy) {
  if (arity_ < 1) throw InvalidSpecError("kernel '" + name_ + "': arity must be >= 1");
  if (!codomain_) throw InvalidSpecError("kernel '" + name_ + "': null codomain");
  if (!fn_) throw InvalidSpecError("kernel '" + name_ + "': empty evaluation function");
  if (sup_bound_ && (!std::isfinite(*sup_bound_) || *sup_bound_ < 0.0))
    throw InvalidSpecError("kernel '" + name_ + "': sup-bound must be finite and >= 0");
  if (declared_degeneracy_ && (*declared_degeneracy_ < 1 || *declared_degeneracy_ > arity_))
    throw InvalidSpecError("kernel '" + name_ + "': declared degeneracy outside [1, m]");
}

HilbertPoint KernelSpec::eval(std::span<const HilbertPoint> args) const {
  std::vector<const HilbertPoint*> refs;
  refs.reserve(args.size());
  for (const auto& a : args) refs.push_back(&a);
  return eval(ArgRefs(refs));
}

HilbertPoint KernelSpec::eval(ArgRefs args) const {
  if (static_cast<int>(args.size()) != arity_)
    throw DimensionError("kernel '" + name_ + "' has arity " + std::to_string(arity_) +
                         ", got " + std::to_string(args.size()) + " arguments");
  HilbertPoint out(codomain_);
  fn_(args, out.coords_mut());
  return out;
}

KernelSpec KernelSpec::with_sup_bound(double bound) const {
  return KernelSpec(name_, arity_, codomain_, fn_, symmetric_, bound, declared_degeneracy_);
}

KernelSpec KernelSpec::with_declared_degeneracy(int order) const {
  return KernelSpec(name_, arity_, codomain_, fn_, symmetric_, sup_bound_, order);
}

namespace {

double distance(const HilbertPoint& u, const HilbertPoint& v) {
  const auto w = u.space()->weights();
  const auto a = u.coords();
  const auto b = v.coords();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += w[i] * d * d;
  }
  return std::sqrt(s);
}

}  // namespace

KernelSpec gini_kernel() {
  return KernelSpec(
      "gini", 2, HilbertSpace::real_line(),
      [](ArgRefs args, std::span<double> out) { out[0] = distance(*args[0], *args[1]); },
      true);
}

KernelSpec spatial_sign_kernel(SpacePtr space) {
  const std::size_t dim = space->dim();
  return KernelSpec(
      "spatial-sign", 2, space,
      [dim](ArgRefs args, std::span<double> out) {
        const double d = distance(*args[0], *args[1]);
        const auto a = args[0]->coords();
        const auto b = args[1]->coords();
        if (d == 0.0) {
          std::fill(out.begin(), out.end(), 0.0);
          return;
        }
        for (std::size_t i = 0; i < dim; ++i) out[i] = (a[i] - b[i]) / d;
      },
      false, 1.0);
}

KernelSpec product_kernel() {
  return KernelSpec(
      "product", 2, HilbertSpace::real_line(),
      [](ArgRefs args, std::span<double> out) {
        out[0] = args[0]->space()->inner(args[0]->coords(), args[1]->coords());
      },
      true);
}

KernelSpec identity_kernel(SpacePtr space) {
  return KernelSpec(
      "identity", 1, space,
      [](ArgRefs args, std::span<double> out) {
        const auto a = args[0]->coords();
        std::copy(a.begin(), a.end(), out.begin());
      },
      true);
}

KernelSpec zero_kernel(int arity, SpacePtr codomain) {
  return KernelSpec(
      "zero", arity, std::move(codomain),
      [](ArgRefs, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); }, true,
      0.0);
}

std::vector<double> cdf_on_midpoint_grid(const FiniteDistribution& dist, std::size_t grid) {
  if (dist.space()->dim() != 1)
    throw PreconditionError("empirical-indicator: the law must be scalar");
  std::vector<double> cdf(grid, 0.0);
  for (std::size_t j = 0; j < grid; ++j) {
    const double t = (static_cast<double>(j) + 0.5) / static_cast<double>(grid);
    double f = 0.0;
    for (std::size_t a = 0; a < dist.size(); ++a) {
      if (dist.atoms()[a].value() <= t) f += dist.probs()[a];
    }
    cdf[j] = f;
  }
  return cdf;
}

KernelSpec empirical_indicator_kernel(std::vector<double> cdf_on_grid) {
  if (cdf_on_grid.empty()) throw InvalidSpecError("empirical-indicator: empty grid");
  for (double f : cdf_on_grid) {
    if (!(f >= 0.0 && f <= 1.0))
      throw InvalidSpecError("empirical-indicator: F values must lie in [0, 1]");
  }
  const std::size_t grid = cdf_on_grid.size();
  SpacePtr space = HilbertSpace::l2_grid(grid);
  return KernelSpec(
      "empirical-indicator", 1, space,
      [cdf = std::move(cdf_on_grid), grid](ArgRefs args, std::span<double> out) {
        const double x = args[0]->value();
        for (std::size_t j = 0; j < grid; ++j) {
          const double t = (static_cast<double>(j) + 0.5) / static_cast<double>(grid);
          out[j] = (x <= t ? 1.0 : 0.0) - cdf[j];
        }
      },
      true, 1.0);
}

namespace {

bool coords_less(const HilbertPoint* a, const HilbertPoint* b) {
  const auto x = a->coords();
  const auto y = b->coords();
  return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end());
}

}  // namespace

KernelSpec symmetrize(const KernelSpec& k) {
  const int m = k.arity();
  if (m > 6) throw PreconditionError("symmetrize: arity above 6 (m! > 720)");
  const std::size_t dim = k.out_dim();
  auto fn = [k, m, dim](ArgRefs args, std::span<double> out) {
    std::vector<const HilbertPoint*> canon(args.begin(), args.end());
    std::stable_sort(canon.begin(), canon.end(), coords_less);
    std::vector<int> perm(static_cast<std::size_t>(m));
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<const HilbertPoint*> permuted(static_cast<std::size_t>(m));
    std::vector<double> tmp(dim);
    std::fill(out.begin(), out.end(), 0.0);
    double count = 0.0;
    do {
      for (int i = 0; i < m; ++i) permuted[i] = canon[perm[i]];
      k.eval_into(permuted, tmp);
      for (std::size_t t = 0; t < dim; ++t) out[t] += tmp[t];
      count += 1.0;
    } while (std::next_permutation(perm.begin(), perm.end()));
    for (auto& v : out) v /= count;
  };
  return KernelSpec(k.name() + "~sym", m, k.codomain(), std::move(fn), true, k.sup_bound(),
                    std::nullopt);
}

double conditional_norm_expectation(const KernelSpec& k, const FiniteDistribution& dist,
                                    std::span<const HilbertPoint> fixed, std::uint64_t cap) {
  const int m = k.arity();
  const int j = static_cast<int>(fixed.size());
  if (j >= m) throw PreconditionError("conditional_norm_expectation: need j < m");
  const int free = m - j;
  const std::size_t atoms = dist.size();
  if (enumeration_size(atoms, free) > cap)
    throw BudgetError("conditional_norm_expectation: enumeration exceeds the cap");

  std::vector<const HilbertPoint*> args(static_cast<std::size_t>(m));
  for (int i = 0; i < j; ++i) args[i] = &fixed[i];
  std::vector<std::size_t> odo(static_cast<std::size_t>(free), 0);
  std::vector<double> out(k.out_dim());
  const auto& space = *k.codomain();
  double acc = 0.0;
  while (true) {
    double weight = 1.0;
    for (int i = 0; i < free; ++i) {
      args[j + i] = &dist.atoms()[odo[i]];
      weight *= dist.probs()[odo[i]];
    }
    k.eval_into(args, out);
    acc += weight * space.norm(out);
    std::size_t pos = odo.size();
    while (pos > 0) {
      if (++odo[pos - 1] < atoms) break;
      odo[pos - 1] = 0;
      --pos;
    }
    if (pos == 0) break;
  }
  return acc;
}

bool within_sup_bound(const KernelSpec& k, std::span<const double> value) {
  if (!k.sup_bound()) return true;
  const double bound = *k.sup_bound();
  return k.codomain()->norm(value) <= bound * (1.0 + 1e-12) + 1e-300;
}

double symmetry_defect(const KernelSpec& k, std::span<const HilbertPoint> args) {
  const int m = k.arity();
  if (static_cast<int>(args.size()) != m)
    throw DimensionError("symmetry_defect: arity mismatch");
  std::vector<const HilbertPoint*> base(args.size());
  for (std::size_t i = 0; i < args.size(); ++i) base[i] = &args[i];
  std::vector<double> ref(k.out_dim()), tmp(k.out_dim());
  k.eval_into(base, ref);
  std::vector<int> perm(static_cast<std::size_t>(m));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<const HilbertPoint*> permuted(args.size());
  double worst = 0.0;
  while (std::next_permutation(perm.begin(), perm.end())) {
    for (int i = 0; i < m; ++i) permuted[i] = base[perm[i]];
    k.eval_into(permuted, tmp);
    for (std::size_t t = 0; t < tmp.size(); ++t) worst = std::max(worst, std::abs(tmp[t] - ref[t]));
  }
  return worst;
}

}  // namespace ustat
