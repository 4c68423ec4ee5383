#include "ustatlab/ustats.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "ustatlab/error.hpp"

namespace ustat {

namespace {

// Pointers to the sample entries addressed by a 1-based tuple.
inline void gather(const IndexTuple& t, std::span<const HilbertPoint> sample,
                   std::vector<const HilbertPoint*>& args) {
  for (int p = 0; p < t.size(); ++p) args[p] = &sample[t[p] - 1];
}

inline void add_into(std::span<double> acc, std::span<const double> v) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
}

void require_sample(const KernelSpec& k, std::size_t n, const char* what) {
  if (n < static_cast<std::size_t>(k.arity()))
    throw InvalidSpecError(std::string(what) + ": sample size " + std::to_string(n) +
                           " below the kernel arity " + std::to_string(k.arity()));
}

}  // namespace

HilbertPoint complete(const KernelSpec& k, std::span<const HilbertPoint> sample,
                      std::uint64_t cap) {
  require_sample(k, sample.size(), "complete");
  IncEnumerator e(k.arity(), sample.size(), cap);
  HilbertPoint acc(k.codomain());
  std::vector<const HilbertPoint*> args(static_cast<std::size_t>(k.arity()));
  std::vector<double> tmp(k.out_dim());
  do {
    gather(e.current(), sample, args);
    k.eval_into(args, tmp);
    add_into(acc.coords_mut(), tmp);
  } while (e.next());
  return acc;
}

namespace {

// Shared incremental loop: `slot(p, i)` returns the argument for position p
// (0-based) at sample index i (1-based).
template <typename Slot>
RunningMax running_max_impl(const KernelSpec& k, std::size_t big_n, std::uint64_t cap,
                            Slot slot) {
  const int m = k.arity();
  if (binomial(big_n, static_cast<std::uint64_t>(m)) > cap)
    throw BudgetError("running_max: C(N, m) exceeds the tuple cap");
  RunningMax out;
  out.norms.reserve(big_n - static_cast<std::size_t>(m) + 1);
  std::vector<double> acc(k.out_dim(), 0.0), tmp(k.out_dim());
  std::vector<const HilbertPoint*> args(static_cast<std::size_t>(m));
  const auto& space = *k.codomain();
  for (std::size_t n = static_cast<std::size_t>(m); n <= big_n; ++n) {
    IncEnumerator head(m - 1, n - 1, cap);
    do {
      const IndexTuple& t = head.current();
      for (int p = 0; p + 1 < m; ++p) args[p] = slot(p, t[p]);
      args[m - 1] = slot(m - 1, static_cast<std::uint32_t>(n));
      k.eval_into(args, tmp);
      add_into(acc, tmp);
    } while (head.next());
    const double nrm = space.norm(acc);
    out.norms.push_back(nrm);
    if (out.norms.size() == 1 || nrm > out.max) {
      out.max = nrm;
      out.argmax_n = n;
    }
  }
  return out;
}

}  // namespace

RunningMax running_max(const KernelSpec& k, std::span<const HilbertPoint> sample,
                       std::uint64_t cap) {
  require_sample(k, sample.size(), "running_max");
  return running_max_impl(k, sample.size(), cap,
                          [&](int, std::uint32_t i) { return &sample[i - 1]; });
}

void DecoupledSample::validate(int m) const {
  if (static_cast<int>(rows.size()) != m)
    throw DimensionError("decoupled sample: expected " + std::to_string(m) + " rows, got " +
                         std::to_string(rows.size()));
  for (const auto& r : rows) {
    if (r.size() != rows.front().size())
      throw DimensionError("decoupled sample: rows differ in length");
  }
}

HilbertPoint decoupled(const KernelSpec& k, const DecoupledSample& d, std::size_t n,
                       std::uint64_t cap) {
  const int m = k.arity();
  d.validate(m);
  if (n > d.length())
    throw DimensionError("decoupled: n exceeds the row length");
  require_sample(k, n, "decoupled");
  IncEnumerator e(m, n, cap);
  HilbertPoint acc(k.codomain());
  std::vector<const HilbertPoint*> args(static_cast<std::size_t>(m));
  std::vector<double> tmp(k.out_dim());
  do {
    const IndexTuple& t = e.current();
    for (int p = 0; p < m; ++p) args[p] = &d.rows[p][t[p] - 1];
    k.eval_into(args, tmp);
    add_into(acc.coords_mut(), tmp);
  } while (e.next());
  return acc;
}

RunningMax decoupled_running_max(const KernelSpec& k, const DecoupledSample& d,
                                 std::uint64_t cap) {
  d.validate(k.arity());
  require_sample(k, d.length(), "decoupled_running_max");
  return running_max_impl(k, d.length(), cap,
                          [&](int p, std::uint32_t i) { return &d.rows[p][i - 1]; });
}

// ---------------------------------------------------------------------------
// Weights

WeightScheme WeightScheme::scalar(double default_value) {
  if (!std::isfinite(default_value)) throw InvalidSpecError("weights: non-finite value");
  return WeightScheme(Kind::kScalar, {default_value});
}

WeightScheme WeightScheme::diagonal(std::vector<double> default_diag) {
  if (default_diag.empty()) throw InvalidSpecError("weights: empty diagonal");
  for (double v : default_diag) {
    if (!std::isfinite(v)) throw InvalidSpecError("weights: non-finite value");
  }
  return WeightScheme(Kind::kDiagonal, std::move(default_diag));
}

void WeightScheme::set(const IndexTuple& t, double c) {
  if (kind_ != Kind::kScalar) throw InvalidSpecError("weights: scalar entry in a diagonal scheme");
  if (!std::isfinite(c)) throw InvalidSpecError("weights: non-finite value");
  values_[t] = {c};
}

void WeightScheme::set(const IndexTuple& t, std::vector<double> diag) {
  if (diag.size() != default_.size())
    throw DimensionError("weights: diagonal length mismatch");
  for (double v : diag) {
    if (!std::isfinite(v)) throw InvalidSpecError("weights: non-finite value");
  }
  values_[t] = std::move(diag);
}

std::span<const double> WeightScheme::at(const IndexTuple& t) const {
  const auto it = values_.find(t);
  return it == values_.end() ? std::span<const double>(default_)
                             : std::span<const double>(it->second);
}

double WeightScheme::operator_norm(const IndexTuple& t) const {
  double r = 0.0;
  for (double v : at(t)) r = std::max(r, std::abs(v));
  return r;
}

void WeightScheme::apply_add(const IndexTuple& t, std::span<const double> value,
                             std::span<double> acc) const {
  const auto op = at(t);
  if (kind_ == Kind::kScalar) {
    const double c = op[0];
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += c * value[i];
    return;
  }
  if (op.size() != acc.size())
    throw DimensionError("weights: diagonal length differs from the codomain dim");
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += op[i] * value[i];
}

std::map<IndexTuple, std::vector<double>> weight_aggregate(const WeightScheme& w, int m,
                                                          std::uint64_t n, int k,
                                                          std::uint64_t cap) {
  if (k < 0 || k > m) throw InvalidSpecError("weight_aggregate: need 0 <= k <= m");
  std::map<IndexTuple, std::vector<double>> out;
  IncEnumerator outer(m, n, cap);
  std::array<std::uint32_t, kMaxArity> sub{};
  do {
    const IndexTuple& j = outer.current();
    const auto op = w.at(j);
    // Every k-subset of the positions of j.
    IncEnumerator pos(k, static_cast<std::uint64_t>(m));
    do {
      const IndexTuple& sel = pos.current();
      for (int q = 0; q < k; ++q) sub[q] = j[static_cast<int>(sel[q]) - 1];
      IndexTuple key(std::span<const std::uint32_t>(sub.data(), static_cast<std::size_t>(k)));
      auto [it, inserted] = out.try_emplace(key, op.size(), 0.0);
      for (std::size_t q = 0; q < op.size(); ++q) it->second[q] += op[q];
    } while (pos.next());
  } while (outer.next());
  return out;
}

HilbertPoint weighted(const KernelSpec& k, const WeightScheme& w,
                      std::span<const HilbertPoint> sample, std::uint64_t cap) {
  require_sample(k, sample.size(), "weighted");
  if (w.kind() == WeightScheme::Kind::kDiagonal && w.width() != k.out_dim())
    throw DimensionError("weighted: diagonal length differs from the codomain dim");
  IncEnumerator e(k.arity(), sample.size(), cap);
  HilbertPoint acc(k.codomain());
  std::vector<const HilbertPoint*> args(static_cast<std::size_t>(k.arity()));
  std::vector<double> tmp(k.out_dim());
  do {
    gather(e.current(), sample, args);
    k.eval_into(args, tmp);
    w.apply_add(e.current(), tmp, acc.coords_mut());
  } while (e.next());
  return acc;
}

// ---------------------------------------------------------------------------
// Sampling designs

SamplingDesign SamplingDesign::without_replacement(std::uint64_t n_draws) {
  return {Kind::kWithoutReplacement, n_draws, 1.0};
}

SamplingDesign SamplingDesign::with_replacement(std::uint64_t n_draws) {
  return {Kind::kWithReplacement, n_draws, 1.0};
}

SamplingDesign SamplingDesign::bernoulli(double p) { return {Kind::kBernoulli, 0, p}; }

void SamplingDesign::validate(int m, std::uint64_t n) const {
  switch (kind) {
    case Kind::kWithoutReplacement: {
      const std::uint64_t total = binomial(n, static_cast<std::uint64_t>(m));
      if (draws < 1 || draws > total)
        throw InvalidSpecError("without-replacement: need 1 <= N <= C(n,m) = " +
                               std::to_string(total) + ", got N = " + std::to_string(draws));
      break;
    }
    case Kind::kWithReplacement:
      if (draws < 1) throw InvalidSpecError("with-replacement: need N >= 1");
      break;
    case Kind::kBernoulli:
      if (!(p > 0.0 && p <= 1.0))
        throw InvalidSpecError("bernoulli: need 0 < p <= 1, got " + std::to_string(p));
      break;
  }
}

double SamplingDesign::expected_size(int m, std::uint64_t n) const {
  if (kind == Kind::kBernoulli)
    return p * static_cast<double>(binomial(n, static_cast<std::uint64_t>(m)));
  return static_cast<double>(draws);
}

std::string SamplingDesign::to_string() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::kWithoutReplacement:
      os << "without-replacement:" << draws;
      break;
    case Kind::kWithReplacement:
      os << "with-replacement:" << draws;
      break;
    case Kind::kBernoulli:
      os.precision(17);
      os << "bernoulli:" << p;
      break;
  }
  return os.str();
}

std::uint64_t Selection::total() const noexcept {
  std::uint64_t s = 0;
  for (const auto& e : entries) s += e.count;
  return s;
}

Selection Selection::all(int m, std::uint64_t n, std::uint64_t cap) {
  Selection s{m, n, {}};
  IncEnumerator e(m, n, cap);
  s.entries.reserve(e.count());
  do {
    s.entries.push_back({e.current(), 1});
  } while (e.next());
  return s;
}

namespace {

// Dense multiplicity vector indexed by lexicographic rank -> selection.
Selection from_dense_counts(int m, std::uint64_t n, const std::vector<std::uint64_t>& counts,
                            std::uint64_t cap) {
  Selection s{m, n, {}};
  IncEnumerator e(m, n, cap);
  std::uint64_t r = 0;
  do {
    if (counts[r] > 0) s.entries.push_back({e.current(), counts[r]});
    ++r;
  } while (e.next());
  return s;
}

// Sorted ranks (with repeats) -> selection.
Selection from_sorted_ranks(int m, std::uint64_t n, const std::vector<std::uint64_t>& ranks) {
  Selection s{m, n, {}};
  for (std::size_t i = 0; i < ranks.size();) {
    std::size_t j = i;
    while (j < ranks.size() && ranks[j] == ranks[i]) ++j;
    s.entries.push_back({unrank_tuple(ranks[i], m, n), j - i});
    i = j;
  }
  return s;
}

}  // namespace

Selection draw_design(const SamplingDesign& design, int m, std::uint64_t n, CounterRng& rng,
                      std::uint64_t cap) {
  design.validate(m, n);
  const std::uint64_t total = binomial(n, static_cast<std::uint64_t>(m));
  if (total > cap) throw BudgetError("draw_design: C(n, m) exceeds the tuple cap");
  switch (design.kind) {
    case SamplingDesign::Kind::kWithoutReplacement: {
      // Floyd's algorithm: uniform N-subset of [0, total).
      std::unordered_set<std::uint64_t> chosen;
      chosen.reserve(design.draws * 2);
      for (std::uint64_t j = total - design.draws; j < total; ++j) {
        const std::uint64_t t = rng.below(j + 1);
        if (!chosen.insert(t).second) chosen.insert(j);
      }
      std::vector<std::uint64_t> ranks(chosen.begin(), chosen.end());
      std::sort(ranks.begin(), ranks.end());
      return from_sorted_ranks(m, n, ranks);
    }
    case SamplingDesign::Kind::kWithReplacement: {
      if (total <= 16 * design.draws && total <= 10'000'000) {
        std::vector<std::uint64_t> counts(total, 0);
        for (std::uint64_t i = 0; i < design.draws; ++i) ++counts[rng.below(total)];
        return from_dense_counts(m, n, counts, cap);
      }
      std::vector<std::uint64_t> ranks(design.draws);
      for (auto& r : ranks) r = rng.below(total);
      std::sort(ranks.begin(), ranks.end());
      return from_sorted_ranks(m, n, ranks);
    }
    case SamplingDesign::Kind::kBernoulli: {
      Selection s{m, n, {}};
      IncEnumerator e(m, n, cap);
      do {
        if (rng.uniform() < design.p) s.entries.push_back({e.current(), 1});
      } while (e.next());
      return s;
    }
  }
  throw InvalidSpecError("draw_design: unknown design");
}

namespace {

IncompleteResult incomplete_impl(const KernelSpec& k, std::span<const HilbertPoint> sample,
                                 const Selection& selection, bool indicator) {
  IncompleteResult r{HilbertPoint(k.codomain()), 0, selection.empty()};
  if (selection.m != k.arity() && !selection.empty())
    throw DimensionError("incomplete: selection arity differs from the kernel arity");
  std::vector<const HilbertPoint*> args(static_cast<std::size_t>(k.arity()));
  std::vector<double> tmp(k.out_dim());
  auto acc = r.value.coords_mut();
  for (const auto& e : selection.entries) {
    e.tuple.check_within(sample.size());
    gather(e.tuple, sample, args);
    k.eval_into(args, tmp);
    const std::uint64_t c = indicator ? 1 : e.count;
    if (c == 1) {
      add_into(acc, tmp);
    } else {
      const auto w = static_cast<double>(c);
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w * tmp[i];
    }
    r.terms += c;
  }
  return r;
}

}  // namespace

IncompleteResult incomplete(const KernelSpec& k, std::span<const HilbertPoint> sample,
                            const Selection& selection) {
  return incomplete_impl(k, sample, selection, false);
}

IncompleteResult incomplete_indicator(const KernelSpec& k, std::span<const HilbertPoint> sample,
                                      const Selection& selection) {
  return incomplete_impl(k, sample, selection, true);
}

double running_max_embedding_check(const KernelSpec& k, std::span<const HilbertPoint> sample,
                                   std::uint64_t cap) {
  require_sample(k, sample.size(), "running_max_embedding_check");
  const std::size_t big_n = sample.size();
  const std::size_t dim = k.out_dim();
  // Component n (1..N) of the H^N-valued sum, stored row-major.
  std::vector<double> stacked(big_n * dim, 0.0);
  std::vector<const HilbertPoint*> args(static_cast<std::size_t>(k.arity()));
  std::vector<double> tmp(dim);
  IncEnumerator e(k.arity(), big_n, cap);
  do {
    const IndexTuple& t = e.current();
    gather(t, sample, args);
    k.eval_into(args, tmp);
    for (std::size_t n = t.last(); n <= big_n; ++n) {
      double* comp = stacked.data() + (n - 1) * dim;
      for (std::size_t i = 0; i < dim; ++i) comp[i] += tmp[i];
    }
  } while (e.next());
  double stacked_norm = 0.0;
  for (std::size_t n = 1; n <= big_n; ++n) {
    stacked_norm = std::max(
        stacked_norm,
        k.codomain()->norm(std::span<const double>(stacked.data() + (n - 1) * dim, dim)));
  }
  return std::abs(stacked_norm - running_max(k, sample, cap).max);
}

}  // namespace ustat
