#include "ustatlab/hoeffding.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <shared_mutex>

#include "ustatlab/combinatorics.hpp"
#include "ustatlab/error.hpp"

namespace ustat {

struct ProjectedKernel::State {
  KernelSpec base;
  FiniteDistribution dist;
  int m;
  // cache[j]: sorted atom indices -> g_j. Values are deterministic, so a
  // racing second writer stores the same bits.
  mutable std::vector<std::map<std::vector<std::uint32_t>, std::vector<double>>> cache;
  mutable std::shared_mutex mu;

  State(KernelSpec b, FiniteDistribution d)
      : base(std::move(b)), dist(std::move(d)), m(base.arity()),
        cache(static_cast<std::size_t>(m) + 1) {}

  // E h(fixed, X_{j+1..m}) by enumerating the free slots.
  void compute_g(std::span<const HilbertPoint* const> fixed, std::span<double> out) const {
    const int j = static_cast<int>(fixed.size());
    const int free = m - j;
    const std::size_t atoms = dist.size();
    std::vector<const HilbertPoint*> args(static_cast<std::size_t>(m));
    std::copy(fixed.begin(), fixed.end(), args.begin());
    std::vector<std::size_t> odo(static_cast<std::size_t>(free), 0);
    std::vector<double> tmp(out.size());
    std::fill(out.begin(), out.end(), 0.0);
    while (true) {
      double weight = 1.0;
      for (int i = 0; i < free; ++i) {
        args[j + i] = &dist.atoms()[odo[i]];
        weight *= dist.probs()[odo[i]];
      }
      base.eval_into(args, tmp);
      for (std::size_t t = 0; t < out.size(); ++t) out[t] += weight * tmp[t];
      std::size_t pos = odo.size();
      while (pos > 0) {
        if (++odo[pos - 1] < atoms) break;
        odo[pos - 1] = 0;
        --pos;
      }
      if (pos == 0) break;
    }
  }

  void g(ArgRefs args, std::span<double> out) const {
    const std::size_t j = args.size();
    std::vector<std::uint32_t> key(j);
    for (std::size_t i = 0; i < j; ++i) {
      const auto idx = dist.find(*args[i]);
      if (!idx) {
        // Off the support: no memoization.
        compute_g(args, out);
        return;
      }
      key[i] = static_cast<std::uint32_t>(*idx);
    }
    std::sort(key.begin(), key.end());
    {
      std::shared_lock lock(mu);
      const auto it = cache[j].find(key);
      if (it != cache[j].end()) {
        std::copy(it->second.begin(), it->second.end(), out.begin());
        return;
      }
    }
    std::vector<const HilbertPoint*> sorted(j);
    for (std::size_t i = 0; i < j; ++i) sorted[i] = &dist.atoms()[key[i]];
    compute_g(sorted, out);
    std::unique_lock lock(mu);
    cache[j].try_emplace(std::move(key), out.begin(), out.end());
  }
};

ProjectedKernel::ProjectedKernel(KernelSpec base, int k, FiniteDistribution dist,
                                 std::uint64_t cap)
    : k_(k) {
  if (!base.symmetric())
    throw PreconditionError("project: kernel '" + base.name() + "' is not symmetric");
  if (k < 0 || k > base.arity())
    throw InvalidSpecError("project: order k must lie in [0, m]");
  if (enumeration_size(dist.size(), base.arity()) > cap)
    throw BudgetError("project: |atoms|^m exceeds the enumeration cap");
  state_ = std::make_shared<State>(std::move(base), std::move(dist));
}

ProjectedKernel::ProjectedKernel(std::shared_ptr<State> state, int k)
    : state_(std::move(state)), k_(k) {}

ProjectedKernel ProjectedKernel::with_order(int k) const {
  if (k < 0 || k > state_->m) throw InvalidSpecError("project: order k must lie in [0, m]");
  return ProjectedKernel(state_, k);
}

const KernelSpec& ProjectedKernel::base() const noexcept { return state_->base; }
const FiniteDistribution& ProjectedKernel::dist() const noexcept { return state_->dist; }

void ProjectedKernel::partial_expectation(ArgRefs args, std::span<double> out) const {
  if (static_cast<int>(args.size()) > state_->m)
    throw DimensionError("partial_expectation: more fixed arguments than the arity");
  state_->g(args, out);
}

void ProjectedKernel::eval_into(ArgRefs args, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  std::vector<double> tmp(out.size());
  std::vector<const HilbertPoint*> sub(static_cast<std::size_t>(k_));
  for (int j = 0; j <= k_; ++j) {
    const double sign = ((k_ - j) % 2 == 0) ? 1.0 : -1.0;
    IncEnumerator u(j, static_cast<std::uint64_t>(k_));
    do {
      const IndexTuple& t = u.current();
      for (int p = 0; p < j; ++p) sub[p] = args[t[p] - 1];
      state_->g(ArgRefs(sub.data(), static_cast<std::size_t>(j)), tmp);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += sign * tmp[i];
    } while (u.next());
  }
}

HilbertPoint ProjectedKernel::eval(std::span<const HilbertPoint> args) const {
  if (static_cast<int>(args.size()) != k_)
    throw DimensionError("h_" + std::to_string(k_) + " takes " + std::to_string(k_) +
                         " arguments, got " + std::to_string(args.size()));
  std::vector<const HilbertPoint*> refs;
  for (const auto& a : args) refs.push_back(&a);
  HilbertPoint out(state_->base.codomain());
  eval_into(refs, out.coords_mut());
  return out;
}

KernelSpec ProjectedKernel::as_kernel() const {
  if (k_ < 1) throw InvalidSpecError("as_kernel: h_0 is a constant, not a kernel");
  ProjectedKernel self = *this;
  return KernelSpec(state_->base.name() + "_h" + std::to_string(k_), k_,
                    state_->base.codomain(),
                    [self](ArgRefs args, std::span<double> out) { self.eval_into(args, out); },
                    true);
}

namespace {

// Visits every nondecreasing index sequence of length k over [0, atoms).
template <typename Visit>
void for_each_multiset(int k, std::size_t atoms, Visit visit) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(k), 0);
  while (true) {
    visit(idx);
    int pos = k - 1;
    while (pos >= 0 && idx[pos] + 1 == atoms) --pos;
    if (pos < 0) return;
    ++idx[pos];
    for (int q = pos + 1; q < k; ++q) idx[q] = idx[pos];
  }
}

}  // namespace

double ProjectedKernel::conditional_mean_defect() const {
  if (k_ == 0) return 0.0;
  const auto& dist = state_->dist;
  const auto& space = *state_->base.codomain();
  const std::size_t dim = state_->base.out_dim();
  std::vector<const HilbertPoint*> args(static_cast<std::size_t>(k_));
  std::vector<double> tmp(dim), mean(dim);
  double worst = 0.0;
  for_each_multiset(k_ - 1, dist.size(), [&](const std::vector<std::size_t>& idx) {
    for (int p = 0; p + 1 < k_; ++p) args[p] = &dist.atoms()[idx[p]];
    std::fill(mean.begin(), mean.end(), 0.0);
    for (std::size_t a = 0; a < dist.size(); ++a) {
      args[k_ - 1] = &dist.atoms()[a];
      eval_into(args, tmp);
      for (std::size_t i = 0; i < dim; ++i) mean[i] += dist.probs()[a] * tmp[i];
    }
    worst = std::max(worst, space.norm(mean));
  });
  return worst;
}

DegeneracyReport degeneracy_order(const KernelSpec& base, const FiniteDistribution& dist,
                                  double tol) {
  if (!(tol >= 0.0)) throw InvalidSpecError("degeneracy_order: tolerance must be >= 0");
  const ProjectedKernel root(base, 0, dist);
  const int m = base.arity();
  const auto& space = *base.codomain();
  DegeneracyReport rep;
  rep.tol = tol;
  rep.residual.assign(static_cast<std::size_t>(m) + 1, 0.0);
  std::vector<const HilbertPoint*> args(static_cast<std::size_t>(m));
  std::vector<double> tmp(base.out_dim());
  for (int k = 0; k <= m; ++k) {
    const ProjectedKernel pk = root.with_order(k);
    double worst = 0.0;
    for_each_multiset(k, dist.size(), [&](const std::vector<std::size_t>& idx) {
      for (int p = 0; p < k; ++p) args[p] = &dist.atoms()[idx[p]];
      pk.eval_into(ArgRefs(args.data(), static_cast<std::size_t>(k)), tmp);
      worst = std::max(worst, space.norm(tmp));
    });
    rep.residual[k] = worst;
  }
  rep.centered = rep.residual[0] <= tol;
  rep.order = m;
  rep.fully_vanishing = true;
  for (int k = 1; k <= m; ++k) {
    if (rep.residual[k] > tol) {
      rep.order = k;
      rep.fully_vanishing = false;
      break;
    }
  }
  return rep;
}

double decomposition_check(const KernelSpec& base, const FiniteDistribution& dist,
                           std::span<const HilbertPoint> sample, std::uint64_t cap) {
  const int m = base.arity();
  const std::uint64_t n = sample.size();
  const HilbertPoint lhs = complete(base, sample, cap);
  const ProjectedKernel root(base, 0, dist);

  HilbertPoint rhs(base.codomain());
  auto acc = rhs.coords_mut();
  std::vector<double> h0(base.out_dim());
  root.eval_into({}, h0);
  const auto c0 = static_cast<double>(binomial(n, static_cast<std::uint64_t>(m)));
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += c0 * h0[i];
  for (int k = 1; k <= m; ++k) {
    const HilbertPoint uk = complete(root.with_order(k).as_kernel(), sample, cap);
    const auto c = static_cast<double>(binomial(n - k, static_cast<std::uint64_t>(m - k)));
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += c * uk[i];
  }
  return norm(axpy(-1.0, rhs, lhs));
}

double weighted_decomposition_check(const KernelSpec& base, const FiniteDistribution& dist,
                                    const WeightScheme& w, std::span<const HilbertPoint> sample,
                                    std::uint64_t cap) {
  const int m = base.arity();
  const std::uint64_t n = sample.size();
  const HilbertPoint lhs = weighted(base, w, sample, cap);
  const ProjectedKernel root(base, 0, dist);
  const std::size_t dim = base.out_dim();

  HilbertPoint rhs(base.codomain());
  auto acc = rhs.coords_mut();
  std::vector<double> hk(dim);
  std::vector<const HilbertPoint*> args(static_cast<std::size_t>(m));
  for (int k = 0; k <= m; ++k) {
    const ProjectedKernel pk = root.with_order(k);
    for (const auto& [tuple, a] : weight_aggregate(w, m, n, k, cap)) {
      for (int p = 0; p < k; ++p) args[p] = &sample[tuple[p] - 1];
      pk.eval_into(ArgRefs(args.data(), static_cast<std::size_t>(k)), hk);
      for (std::size_t i = 0; i < dim; ++i) acc[i] += (a.size() == 1 ? a[0] : a[i]) * hk[i];
    }
  }
  return norm(axpy(-1.0, rhs, lhs));
}

// ---------------------------------------------------------------------------
// Plug-in mode

McProjector::McProjector(KernelSpec base, const SamplerSpec& law, std::size_t draws,
                         std::uint64_t seed)
    : base_(std::move(base)) {
  if (!base_.symmetric())
    throw PreconditionError("project: kernel '" + base_.name() + "' is not symmetric");
  if (draws < 2) throw InvalidSpecError("plug-in projection: need at least 2 draws");
  const auto m = static_cast<std::size_t>(base_.arity());
  CounterRng rng(seed, mix64(0x686f6566ULL ^ law.stream_id), 0);
  auto flat = draw_iid(law, draws * m, rng);
  aux_.resize(draws);
  for (std::size_t r = 0; r < draws; ++r)
    aux_[r].assign(flat.begin() + static_cast<std::ptrdiff_t>(r * m),
                   flat.begin() + static_cast<std::ptrdiff_t>((r + 1) * m));
}

McValue McProjector::eval(int k, std::span<const HilbertPoint> s) const {
  const int m = base_.arity();
  if (k < 0 || k > m || static_cast<int>(s.size()) != k)
    throw DimensionError("plug-in projection: need k arguments with 0 <= k <= m");
  const std::size_t dim = base_.out_dim();
  std::vector<double> sum(dim, 0.0), sumsq(dim, 0.0), v(dim), tmp(dim);
  std::vector<const HilbertPoint*> args(static_cast<std::size_t>(m));
  for (const auto& row : aux_) {
    std::fill(v.begin(), v.end(), 0.0);
    for (int j = 0; j <= k; ++j) {
      const double sign = ((k - j) % 2 == 0) ? 1.0 : -1.0;
      for (int q = j; q < m; ++q) args[q] = &row[q];
      IncEnumerator u(j, static_cast<std::uint64_t>(k));
      do {
        for (int p = 0; p < j; ++p) args[p] = &s[u.current()[p] - 1];
        base_.eval_into(args, tmp);
        for (std::size_t i = 0; i < dim; ++i) v[i] += sign * tmp[i];
      } while (u.next());
    }
    for (std::size_t i = 0; i < dim; ++i) {
      sum[i] += v[i];
      sumsq[i] += v[i] * v[i];
    }
  }
  const auto r = static_cast<double>(aux_.size());
  McValue out{HilbertPoint(base_.codomain()), 0.0};
  const auto w = base_.codomain()->weights();
  double se2 = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double mean = sum[i] / r;
    out.value.coords_mut()[i] = mean;
    const double var = std::max(0.0, (sumsq[i] - r * mean * mean) / (r - 1.0));
    se2 += w[i] * var / r;
  }
  out.se = std::sqrt(se2);
  return out;
}

DegeneracyReport degeneracy_order_mc(const KernelSpec& base, const SamplerSpec& law,
                                     std::size_t probes, std::size_t draws,
                                     std::uint64_t seed) {
  const McProjector proj(base, law, draws, seed);
  const int m = base.arity();
  CounterRng rng(seed, mix64(0x70726f6265ULL ^ law.stream_id), 1);
  DegeneracyReport rep;
  rep.tol = 4.0;  // in units of the plug-in standard error
  rep.residual.assign(static_cast<std::size_t>(m) + 1, 0.0);
  std::vector<bool> vanishes(static_cast<std::size_t>(m) + 1, true);
  for (int k = 0; k <= m; ++k) {
    const std::size_t count = k == 0 ? 1 : probes;
    for (std::size_t p = 0; p < count; ++p) {
      const auto pts = k == 0 ? std::vector<HilbertPoint>{}
                              : draw_iid(law, static_cast<std::size_t>(k), rng);
      const McValue v = proj.eval(k, pts);
      const double nv = norm(v.value);
      rep.residual[k] = std::max(rep.residual[k], nv);
      if (nv > rep.tol * v.se) vanishes[k] = false;
    }
  }
  rep.centered = vanishes[0];
  rep.order = m;
  rep.fully_vanishing = true;
  for (int k = 1; k <= m; ++k) {
    if (!vanishes[k]) {
      rep.order = k;
      rep.fully_vanishing = false;
      break;
    }
  }
  return rep;
}

}  // namespace ustat
