#include "ustatlab/montecarlo.hpp"

#include <algorithm>
#include <cmath>

#include "ustatlab/error.hpp"
#include "ustatlab/hoeffding.hpp"
#include "ustatlab/parallel.hpp"

namespace ustat {

std::string to_string(Statistic s) {
  switch (s) {
    case Statistic::kComplete:
      return "complete";
    case Statistic::kRunningMax:
      return "running-max";
    case Statistic::kDecoupled:
      return "decoupled";
    case Statistic::kDecoupledRunningMax:
      return "decoupled-running-max";
    case Statistic::kIncomplete:
      return "incomplete";
    case Statistic::kIncompleteIndicator:
      return "incomplete-indicator";
  }
  return "?";
}

std::optional<Statistic> parse_statistic(const std::string& name) {
  for (auto s : {Statistic::kComplete, Statistic::kRunningMax, Statistic::kDecoupled,
                 Statistic::kDecoupledRunningMax, Statistic::kIncomplete,
                 Statistic::kIncompleteIndicator}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

namespace {

constexpr std::size_t kSupSpotChecks = 4;

DecoupledSample draw_rows(const SamplerSpec& law, std::size_t n, int m, std::uint64_t seed,
                          std::uint64_t stream) {
  DecoupledSample d;
  for (int j = 0; j < m; ++j) {
    CounterRng rng(seed, stream, static_cast<std::uint32_t>(1 + j));
    d.rows.push_back(draw_iid(law, n, rng));
  }
  return d;
}

bool is_incomplete(Statistic s) {
  return s == Statistic::kIncomplete || s == Statistic::kIncompleteIndicator;
}

}  // namespace

ReplicateResult replicate(const ReplicateSpec& spec) {
  const int m = spec.kernel.arity();
  spec.law.validate();
  if (spec.replicas < 1) throw InvalidSpecError("replicate: need at least one replica");
  if (spec.n < static_cast<std::size_t>(m))
    throw InvalidSpecError("replicate: n must be >= the kernel arity");
  if (is_incomplete(spec.statistic)) {
    if (!spec.design) throw InvalidSpecError("replicate: incomplete statistic needs a design");
    spec.design->validate(m, spec.n);
  }
  const std::size_t r_count = spec.replicas;
  const bool keep = spec.keep_values && spec.statistic != Statistic::kRunningMax &&
                    spec.statistic != Statistic::kDecoupledRunningMax;

  ReplicateResult res;
  res.norms.assign(r_count, 0.0);
  res.terms.assign(r_count, 0);
  res.distinct.assign(r_count, 0);
  if (keep) res.values.assign(r_count, {});
  std::vector<std::uint8_t> empty(r_count, 0), checks(r_count, 0), bad(r_count, 0);
  const std::uint64_t all_terms = binomial(spec.n, static_cast<std::uint64_t>(m));

  parallel_for(r_count, spec.threads, [&](std::size_t r) {
    try {
      CounterRng data(spec.seed, r, kDataLane);
      const auto sample = draw_iid(spec.law, spec.n, data);
      if (spec.kernel.sup_bound()) {
        IncEnumerator e(m, spec.n, spec.cap);
        std::vector<const HilbertPoint*> args(static_cast<std::size_t>(m));
        std::vector<double> out(spec.kernel.out_dim());
        for (std::size_t c = 0; c < kSupSpotChecks; ++c) {
          for (int p = 0; p < m; ++p) args[p] = &sample[e.current()[p] - 1];
          spec.kernel.eval_into(args, out);
          ++checks[r];
          if (!within_sup_bound(spec.kernel, out)) ++bad[r];
          if (!e.next()) break;
        }
      }
      HilbertPoint value(spec.kernel.codomain());
      switch (spec.statistic) {
        case Statistic::kComplete:
          value = complete(spec.kernel, sample, spec.cap);
          res.norms[r] = norm(value);
          res.terms[r] = res.distinct[r] = all_terms;
          break;
        case Statistic::kRunningMax:
          res.norms[r] = running_max(spec.kernel, sample, spec.cap).max;
          res.terms[r] = res.distinct[r] = all_terms;
          break;
        case Statistic::kDecoupled:
        case Statistic::kDecoupledRunningMax: {
          const auto rows = draw_rows(spec.law, spec.n, m, spec.seed, r);
          if (spec.statistic == Statistic::kDecoupled) {
            value = decoupled(spec.kernel, rows, spec.n, spec.cap);
            res.norms[r] = norm(value);
          } else {
            res.norms[r] = decoupled_running_max(spec.kernel, rows, spec.cap).max;
          }
          res.terms[r] = res.distinct[r] = all_terms;
          break;
        }
        case Statistic::kIncomplete:
        case Statistic::kIncompleteIndicator: {
          CounterRng des(spec.seed, r, kDesignLane);
          const Selection sel = draw_design(*spec.design, m, spec.n, des, spec.cap);
          const IncompleteResult ir = spec.statistic == Statistic::kIncomplete
                                          ? incomplete(spec.kernel, sample, sel)
                                          : incomplete_indicator(spec.kernel, sample, sel);
          value = ir.value;
          res.norms[r] = norm(value);
          res.terms[r] = ir.terms;
          res.distinct[r] = sel.distinct();
          empty[r] = ir.empty ? 1 : 0;
          break;
        }
      }
      if (keep) res.values[r].assign(value.coords().begin(), value.coords().end());
    } catch (const BudgetError& e) {
      throw BudgetError("replica " + std::to_string(r) + ": " + e.what());
    }
  });
  for (std::size_t r = 0; r < r_count; ++r) {
    res.empty_selections += empty[r];
    res.sup_bound_checks += checks[r];
    res.sup_bound_violations += bad[r];
  }
  return res;
}

// ---------------------------------------------------------------------------
// Envelopes

BoundEnvelope BoundEnvelope::with_defaults(double a, double b, double c, double y, int m) {
  BoundEnvelope e{a, b, c, y, m, default_log_power(m)};
  e.validate();
  return e;
}

void BoundEnvelope::validate() const {
  if (!(a > 0.0) || !(c > 0.0) || !(y > 0.0) || !(b >= 0.0))
    throw InvalidSpecError("envelope: A, C, y must be > 0 and B >= 0");
  if (m < 1) throw InvalidSpecError("envelope: m must be >= 1");
  if (!(log_power >= 0.0)) throw InvalidSpecError("envelope: log exponent must be >= 0");
}

namespace {

std::function<double(double)> log_weight(double p) {
  return [p](double u) { return u * std::pow(1.0 + std::log(u), p); };
}

}  // namespace

EnvelopeValue envelope_eval(const BoundEnvelope& env, double x, const TailOracle& tail,
                            std::size_t resolution) {
  env.validate();
  EnvelopeValue v;
  v.exp_term = env.a * std::exp(-std::pow(x / env.y, 2.0 / env.m));
  if (env.b > 0.0) {
    const TailIntegral ti = tail_integral(tail, env.c * env.y, log_weight(env.log_power),
                                          resolution);
    v.diverged = ti.diverged;
    v.integral_term = env.b * ti.value;
  }
  v.value = v.diverged ? INFINITY : v.exp_term + v.integral_term;
  return v;
}

EnvelopeValue theorem2_envelope(const BoundEnvelope& env, int d, double x, double big_n,
                                const std::vector<TailOracle>& h_laws,
                                std::size_t resolution) {
  env.validate();
  if (d < 1 || d > env.m) throw InvalidSpecError("envelope: need 1 <= d <= m");
  if (h_laws.size() != static_cast<std::size_t>(env.m - d + 1))
    throw DimensionError("envelope: need one H_k law for each k = d..m");
  EnvelopeValue v;
  v.exp_term = env.a * std::exp(-std::pow(x / env.y, 2.0 / d));
  for (int k = d; k <= env.m && env.b > 0.0; ++k) {
    const double kd = static_cast<double>(k) / d;
    const double scale = env.c * std::pow(big_n, (k - d) / 2.0) * std::pow(x, 1.0 - kd) *
                         std::pow(env.y, kd);
    const TailIntegral ti = tail_integral(h_laws[static_cast<std::size_t>(k - d)], scale,
                                          log_weight(env.log_power), resolution);
    v.diverged = v.diverged || ti.diverged;
    v.integral_term += env.b * ti.value;
  }
  v.value = v.diverged ? INFINITY : v.exp_term + v.integral_term;
  return v;
}

TailOracle conditional_norm_law(const KernelSpec& k, const FiniteDistribution& dist, int order,
                                std::uint64_t cap) {
  const int m = k.arity();
  if (order < 0 || order > m) throw InvalidSpecError("conditional_norm_law: need 0 <= k <= m");
  if (enumeration_size(dist.size(), order) > cap)
    throw BudgetError("conditional_norm_law: enumeration exceeds the cap");
  std::vector<double> values, probs;
  std::vector<std::size_t> odo(static_cast<std::size_t>(order), 0);
  std::vector<HilbertPoint> fixed;
  while (true) {
    fixed.clear();
    double p = 1.0;
    for (std::size_t i : odo) {
      fixed.push_back(dist.atoms()[i]);
      p *= dist.probs()[i];
    }
    values.push_back(order == m ? norm(k.eval(fixed))
                                : conditional_norm_expectation(k, dist, fixed, cap));
    probs.push_back(p);
    std::size_t pos = odo.size();
    while (pos > 0) {
      if (++odo[pos - 1] < dist.size()) break;
      odo[pos - 1] = 0;
      --pos;
    }
    if (pos == 0) break;
  }
  return TailOracle::discrete(std::move(values), std::move(probs));
}

// ---------------------------------------------------------------------------
// Tail scan

namespace {

int resolve_degeneracy(const KernelSpec& k, const SamplerSpec& law, std::optional<int> given,
                       const char* who) {
  if (const auto finite = law.as_finite()) {
    const DegeneracyReport rep = degeneracy_order(k, *finite);
    if (!rep.centered)
      throw PreconditionError(std::string(who) + ": kernel is not centered (E h != 0)");
    return given.value_or(rep.order);
  }
  if (given) return *given;
  if (k.declared_degeneracy()) return *k.declared_degeneracy();
  throw PreconditionError(std::string(who) +
                          ": degeneracy order unknown (no finite law and none declared)");
}

void require_grid(const std::vector<double>& xs, const char* who) {
  if (xs.empty()) throw InvalidSpecError(std::string(who) + ": empty x-grid");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !std::isfinite(xs[i]) || (i > 0 && xs[i] <= xs[i - 1]))
      throw InvalidSpecError(std::string(who) + ": x-grid must be positive and strictly increasing");
  }
}

}  // namespace

void fit_tail_exponent(TailScanReport& rep, std::size_t min_points) {
  std::vector<double> lx, ly;
  for (const auto& p : rep.points) {
    if (p.p_hat >= rep.window_lo && p.p_hat <= rep.window_hi && p.p_hat > 0.0 && p.p_hat < 1.0) {
      lx.push_back(std::log(p.x));
      ly.push_back(std::log(-std::log(p.p_hat)));
    }
  }
  rep.fit_available = lx.size() >= std::max<std::size_t>(min_points, 2);
  if (!rep.fit_available) {
    rep.beta = std::numeric_limits<double>::quiet_NaN();
    rep.fit = LinearFit{};
    rep.fit.points = lx.size();
    return;
  }
  rep.fit = least_squares(lx, ly);
  rep.beta = rep.fit.slope;
}

TailScanReport tail_scan(const TailScanConfig& cfg) {
  require_grid(cfg.x_grid, "tail_scan");
  const KernelSpec& k = cfg.rep.kernel;
  const int m = k.arity();
  const int d = resolve_degeneracy(k, cfg.rep.law, cfg.degeneracy, "tail_scan");
  if (d < 1 || d > m) throw InvalidSpecError("tail_scan: degeneracy order outside [1, m]");

  ReplicateSpec spec = cfg.rep;
  spec.statistic = cfg.running_max ? Statistic::kRunningMax : Statistic::kComplete;
  spec.keep_values = false;
  const ReplicateResult res = replicate(spec);

  TailScanReport rep;
  rep.m = m;
  rep.d = d;
  rep.replicas = spec.replicas;
  rep.window_lo = cfg.window_lo;
  rep.window_hi = cfg.window_hi;
  rep.scale = std::pow(static_cast<double>(spec.n), m - d / 2.0);
  rep.normalization = std::string(cfg.running_max ? "max_n ||U_n||" : "||U_N||") +
                      " / N^(m-d/2)";
  rep.sup_bound_violations = res.sup_bound_violations;

  std::vector<double> sorted(res.norms);
  for (auto& v : sorted) v /= rep.scale;
  std::sort(sorted.begin(), sorted.end());

  std::optional<TailOracle> oracle;
  if (cfg.envelope && k.sup_bound()) {
    const double terms = static_cast<double>(binomial(spec.n, static_cast<std::uint64_t>(m)));
    oracle = TailOracle::cutoff(*k.sup_bound() * std::sqrt(terms));
  }
  for (double x : cfg.x_grid) {
    TailPoint p;
    p.x = x;
    const auto hits = static_cast<std::uint64_t>(
        sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), x));
    p.p_hat = static_cast<double>(hits) / static_cast<double>(sorted.size());
    const Interval ci = wilson(hits, sorted.size());
    p.ci_lo = ci.lo;
    p.ci_hi = ci.hi;
    if (oracle) p.envelope = envelope_eval(*cfg.envelope, x * rep.scale, *oracle).value;
    rep.points.push_back(p);
  }
  fit_tail_exponent(rep, cfg.min_fit_points);
  return rep;
}

// ---------------------------------------------------------------------------
// Incomplete scaling

double replacement_normalization(double big_n, double n, int m, int d) {
  return std::sqrt(big_n) * std::sqrt(std::min(big_n, std::pow(n, m - d)));
}

double bernoulli_normalization(double p, double n, int m, int d) {
  return std::pow(n, m) * std::sqrt(p) * std::sqrt(std::min(p, std::pow(n, -d)));
}

std::vector<ScalingRow> incomplete_scaling_experiment(const ScalingConfig& cfg) {
  const KernelSpec& k = cfg.kernel;
  const int m = k.arity();
  const int d = resolve_degeneracy(k, cfg.law, cfg.degeneracy, "incomplete_scaling");
  if (!(cfg.q > 0.0 && cfg.q < 1.0)) throw InvalidSpecError("incomplete_scaling: q outside (0, 1)");
  if (cfg.replicas < 2) throw InvalidSpecError("incomplete_scaling: need at least 2 replicas");
  const std::size_t dim = k.out_dim();
  std::vector<ScalingRow> rows;

  for (std::size_t c = 0; c < cfg.cells.size(); ++c) {
    const ScalingCell& cell = cfg.cells[c];
    cell.design.validate(m, cell.n);
    const bool bern = cell.design.kind == SamplingDesign::Kind::kBernoulli;
    const auto n = static_cast<double>(cell.n);
    const auto norm_at = [&](double count) {
      return bern ? bernoulli_normalization(cell.design.p, n, m, d)
                  : replacement_normalization(count, n, m, d);
    };

    ScalingRow row;
    row.n = cell.n;
    row.design = cell.design;
    row.m = m;
    row.d = d;
    row.normalization = norm_at(static_cast<double>(cell.design.draws));

    // Replicas: fresh data and a fresh design each time.
    std::vector<double> mult(cfg.replicas), ind(cfg.replicas), distinct(cfg.replicas);
    std::vector<std::uint8_t> empty(cfg.replicas);
    parallel_for(cfg.replicas, cfg.threads, [&](std::size_t r) {
      CounterRng data(cfg.seed, r, kDataLane);
      const auto sample = draw_iid(cfg.law, cell.n, data);
      CounterRng des(cfg.seed, r, kDesignLane);
      const Selection sel = draw_design(cell.design, m, cell.n, des);
      empty[r] = sel.empty() ? 1 : 0;
      distinct[r] = static_cast<double>(sel.distinct());
      if (sel.empty()) return;
      mult[r] = norm(incomplete(k, sample, sel).value);
      ind[r] = norm(incomplete_indicator(k, sample, sel).value) / norm_at(distinct[r]);
    });
    std::vector<double> mq, iq;
    double dsum = 0.0;
    for (std::size_t r = 0; r < cfg.replicas; ++r) {
      dsum += distinct[r];
      if (empty[r]) {
        ++row.empty;
        continue;
      }
      mq.push_back(mult[r]);
      iq.push_back(ind[r]);
    }
    row.mean_distinct = dsum / static_cast<double>(cfg.replicas);
    if (!mq.empty()) {
      row.quantile = quantile(mq, cfg.q);
      row.normalized = row.quantile / row.normalization;
      row.normalized_indicator = quantile(iq, cfg.q);
    }

    // Unbiasedness: one fixed sample, many designs. Empty selections stay in
    // as zeros.
    CounterRng fixed_rng(cfg.seed, 0xFFFF'0000'0000ULL + c, kDataLane);
    const auto sample = draw_iid(cfg.law, cell.n, fixed_rng);
    const HilbertPoint full = complete(k, sample);
    const double total = static_cast<double>(binomial(cell.n, static_cast<std::uint64_t>(m)));
    const double expected = cell.design.expected_size(m, cell.n);
    std::vector<std::vector<double>> est(cfg.replicas);
    parallel_for(cfg.replicas, cfg.threads, [&](std::size_t r) {
      CounterRng rng(cfg.seed ^ mix64(0x756e62ULL + c), r, kDesignLane);
      const Selection sel = draw_design(cell.design, m, cell.n, rng);
      const HilbertPoint v = incomplete(k, sample, sel).value;
      est[r].resize(dim);
      for (std::size_t i = 0; i < dim; ++i) est[r][i] = v[i] / expected;
    });
    double worst_z = 0.0;
    bool ok = true;
    for (std::size_t i = 0; i < dim; ++i) {
      std::vector<double> col(cfg.replicas);
      for (std::size_t r = 0; r < cfg.replicas; ++r) col[r] = est[r][i];
      const MeanSe ms = mean_se(col);
      const double target = full[i] / total;
      const double gap = std::abs(ms.mean - target);
      // Gaps at rounding level count as exact, whatever the se.
      double z = 0.0;
      if (gap > 1e-12 * (1.0 + std::abs(target))) z = ms.se > 0.0 ? gap / ms.se : INFINITY;
      if (i == 0) {
        row.unbiased_mean = ms.mean;
        row.unbiased_target = target;
        row.unbiased_se = ms.se;
      }
      worst_z = std::max(worst_z, z);
      ok = ok && z <= 4.0;
    }
    row.unbiased_z = worst_z;
    row.unbiased_ok = ok;
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Decoupling

DecoupleReport fit_decoupling(std::vector<double> complete_norms,
                              std::vector<double> decoupled_norms,
                              const std::vector<double>& x_grid, double k_max) {
  require_grid(x_grid, "decouple_compare");
  if (complete_norms.empty() || decoupled_norms.empty())
    throw InvalidSpecError("decouple_compare: no replicas");
  if (!(k_max >= 1.0)) throw InvalidSpecError("decouple_compare: k_max must be >= 1");
  std::sort(complete_norms.begin(), complete_norms.end());
  std::sort(decoupled_norms.begin(), decoupled_norms.end());
  DecoupleReport rep;
  rep.replicas = complete_norms.size();
  const double floor = 10.0 / static_cast<double>(rep.replicas);
  std::vector<double> usable;
  for (double x : x_grid) {
    DecouplePoint p;
    p.x = x;
    p.p_complete = tail_fraction(complete_norms, x);
    p.p_decoupled = tail_fraction(decoupled_norms, x);
    p.usable = !(p.p_complete < floor && p.p_decoupled < floor);
    if (p.usable) usable.push_back(x);
    rep.points.push_back(p);
  }
  rep.usable_points = usable.size();
  if (usable.empty()) return rep;
  rep.k_defined = true;

  // Excess of the left side over K P(K ||U^dec|| > x); nonincreasing in K.
  const auto excess = [&](double kk) {
    double worst = -INFINITY;
    for (double x : usable) {
      worst = std::max(worst, tail_fraction(complete_norms, x) -
                                  kk * tail_fraction(decoupled_norms, x / kk));
    }
    return worst;
  };
  if (excess(1.0) <= 0.0) {
    rep.fitted_k = 1.0;
    rep.domination_holds = true;
    return rep;
  }
  if (excess(k_max) > 0.0) {
    rep.fitted_k = INFINITY;
    return rep;
  }
  double lo = 1.0, hi = k_max;
  for (int it = 0; it < 200 && hi / lo > 1.0 + 1e-12; ++it) {
    const double mid = std::sqrt(lo * hi);
    (excess(mid) <= 0.0 ? hi : lo) = mid;
  }
  rep.fitted_k = hi;
  rep.domination_holds = true;
  return rep;
}

DecoupleReport decouple_compare(const DecoupleConfig& cfg) {
  ReplicateSpec spec{cfg.kernel, cfg.law, cfg.n, cfg.replicas, cfg.seed, cfg.threads,
                     Statistic::kComplete, std::nullopt};
  const ReplicateResult plain = replicate(spec);
  spec.statistic = Statistic::kDecoupled;
  const ReplicateResult dec = replicate(spec);
  return fit_decoupling(plain.norms, dec.norms, cfg.x_grid, cfg.k_max);
}

}  // namespace ustat
