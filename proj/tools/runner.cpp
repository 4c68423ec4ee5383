#include "runner.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ustatlab/combinatorics.hpp"
#include "ustatlab/error.hpp"
#include "ustatlab/hoeffding.hpp"
#include "ustatlab/parallel.hpp"

#ifndef USTATLAB_VERSION
#define USTATLAB_VERSION "0.0.0"
#endif

namespace ustat::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256: digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string sha256_file(const std::string& path) { return sha256_hex(read_file(path)); }

void write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp + "'");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + tmp + "'");
  }
  fs::rename(tmp, path);
}

WeightScheme parse_weights_file(const std::string& path, int m) {
  std::ifstream in(path);
  if (!in) throw ConfigError("weights_file", 0, "cannot read '" + path + "'");
  WeightScheme w = WeightScheme::scalar(0.0);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != static_cast<std::size_t>(m) + 1)
      throw ConfigError(path, lineno, "expected " + std::to_string(m) + " indices and a weight");
    try {
      std::vector<std::uint32_t> idx;
      for (int j = 0; j < m; ++j) idx.push_back(static_cast<std::uint32_t>(std::stoul(cells[j])));
      w.set(IndexTuple(std::span<const std::uint32_t>(idx)), std::stod(cells.back()));
    } catch (const Error& e) {
      throw ConfigError(path, lineno, e.what());
    } catch (const std::exception&) {
      throw ConfigError(path, lineno, "malformed number");
    }
  }
  return w;
}

namespace {

std::vector<std::vector<double>> parse_sample_flag(const std::string& text) {
  std::vector<std::vector<double>> pts;
  const bool vector_points = text.find(';') != std::string::npos;
  std::stringstream outer(text);
  try {
    if (vector_points) {
      for (std::string pt; std::getline(outer, pt, ';');) {
        std::vector<double> coords;
        std::stringstream inner(pt);
        for (std::string c; std::getline(inner, c, ',');) coords.push_back(std::stod(c));
        pts.push_back(std::move(coords));
      }
    } else {
      for (std::string c; std::getline(outer, c, ',');) pts.push_back({std::stod(c)});
    }
  } catch (const std::exception&) {
    throw ConfigError("sample", 0, "malformed sample '" + text + "'");
  }
  return pts;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }

  std::string csv() const {
    std::string s;
    for (std::size_t i = 0; i < columns.size(); ++i) s += (i ? "," : "") + columns[i];
    s += '\n';
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + r[i];
      s += '\n';
    }
    return s;
  }

  std::string dat() const {
    std::string s = "#";
    for (const auto& c : columns) s += " " + c;
    s += '\n';
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) s += (i ? " " : "") + r[i];
      s += '\n';
    }
    return s;
  }
};

std::string num(double v) { return format_double(v); }
std::string num(std::uint64_t v) { return std::to_string(v); }
std::string flag(bool b) { return b ? "1" : "0"; }

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

class Run {
 public:
  Run(const Config& cfg, std::ostream& log) : cfg_(cfg), log_(log) {
    fs::create_directories(cfg.output);
    threads_ = resolve_threads(cfg.threads);
  }

  void emit(const std::string& stem, const Table& t) {
    write(stem + ".csv", t.csv());
    write(stem + ".dat", t.dat());
  }

  void write(const std::string& name, const std::string& content) {
    const std::string path = (fs::path(cfg_.output) / name).string();
    write_atomic(path, content);
    outcome_.files.push_back(path);
    files_.push_back({{"name", name}, {"sha256", sha256_hex(content)}});
  }

  RunOutcome finish(const std::string& started, json results, int status) {
    const std::string config_text = emit_config(cfg_);
    write("config.yaml", config_text);
    json m;
    m["artifact_version"] = USTATLAB_VERSION;
    m["experiment"] = cfg_.experiment;
    m["config_sha256"] = sha256_hex(config_text);
    m["seed"] = cfg_.seed;
    m["threads"] = threads_;
    m["started_at"] = started;
    m["finished_at"] = utc_now();
    m["status"] = status == kExitOk ? "ok" : "violation";
    m["files"] = files_;
    m["results"] = std::move(results);
    const std::string path = (fs::path(cfg_.output) / "manifest.json").string();
    write_atomic(path, m.dump(2) + "\n");
    outcome_.files.push_back(path);
    outcome_.status = status;
    outcome_.manifest = std::move(m);
    return outcome_;
  }

  int threads() const { return threads_; }
  std::ostream& log() { return log_; }

 private:
  const Config& cfg_;
  std::ostream& log_;
  int threads_ = 1;
  json files_ = json::array();
  RunOutcome outcome_;
};

std::vector<HilbertPoint> sample_points(const Config& cfg, const SamplerSpec& law) {
  if (cfg.sample.empty()) return draw_iid(law, cfg.n, cfg.seed, 0);
  const std::size_t dim = cfg.sample.front().size();
  SpacePtr space = law.space();
  if (space->dim() != dim) space = dim == 1 ? HilbertSpace::real_line() : HilbertSpace::euclidean(dim);
  std::vector<HilbertPoint> pts;
  for (const auto& p : cfg.sample) {
    if (p.size() != dim) throw ConfigError("sample", 0, "points differ in dimension");
    pts.emplace_back(space, p);
  }
  return pts;
}

RunOutcome run_estimate(const Config& cfg, Run& run, const std::string& started) {
  const KernelSpec k = build_kernel(cfg);
  const SamplerSpec law = build_sampler(cfg.distribution);
  const auto sample = sample_points(cfg, law);
  const int m = k.arity();
  const std::uint64_t n = sample.size();

  HilbertPoint value(k.codomain());
  std::string statistic;
  std::uint64_t terms = 0;
  if (!cfg.weights_file.empty()) {
    const WeightScheme w = parse_weights_file(cfg.weights_file, m);
    value = weighted(k, w, sample);
    statistic = "weighted";
    terms = w.explicit_entries().size();
  } else if (cfg.design) {
    const SamplingDesign design = build_design(*cfg.design);
    CounterRng rng(cfg.seed, 0, kDesignLane);
    const Selection sel = draw_design(design, m, n, rng);
    const IncompleteResult r = incomplete(k, sample, sel);
    value = r.value;
    terms = r.terms;
    statistic = "incomplete:" + design.to_string();
  } else {
    value = complete(k, sample);
    terms = binomial(n, static_cast<std::uint64_t>(m));
    statistic = "complete";
  }

  Table t;
  t.columns = {"statistic", "m", "n", "terms", "norm"};
  std::vector<std::string> row = {statistic, std::to_string(m), std::to_string(n), num(terms),
                                  num(norm(value))};
  if (value.dim() == 1) {
    t.columns.push_back("value");
  } else {
    for (std::size_t i = 0; i < value.dim(); ++i) t.columns.push_back("value_" + std::to_string(i + 1));
  }
  for (double v : value.coords()) row.push_back(num(v));
  t.add(row);
  run.emit("estimate", t);
  run.log() << t.csv();

  json res;
  res["statistic"] = statistic;
  res["m"] = m;
  res["n"] = n;
  res["terms"] = terms;
  res["norm"] = norm(value);
  res["value"] = std::vector<double>(value.coords().begin(), value.coords().end());
  return run.finish(started, res, kExitOk);
}

RunOutcome run_decompose(const Config& cfg, Run& run, const std::string& started) {
  const KernelSpec k = build_kernel(cfg);
  const SamplerSpec law = build_sampler(cfg.distribution);
  const auto dist = law.as_finite();
  if (!dist) throw ConfigError("distribution.kind", 0, "decompose needs a finite-support law");
  const DegeneracyReport rep = degeneracy_order(k, *dist, cfg.tolerance.degeneracy);

  Table t;
  t.columns = {"k", "residual", "vanishing"};
  for (std::size_t j = 0; j < rep.residual.size(); ++j)
    t.add({std::to_string(j), num(rep.residual[j]), flag(rep.residual[j] <= rep.tol)});
  run.emit("decompose", t);
  run.log() << t.csv();

  json res;
  res["degeneracy_order"] = rep.order;
  res["centered"] = rep.centered;
  res["fully_vanishing"] = rep.fully_vanishing;
  res["tolerance"] = rep.tol;
  res["residual"] = rep.residual;
  int status = kExitOk;
  if (k.declared_degeneracy() && !rep.fully_vanishing && *k.declared_degeneracy() != rep.order) {
    run.log() << "declared degeneracy " << *k.declared_degeneracy() << " but detected "
              << rep.order << "\n";
    status = kExitViolation;
  }
  if (cfg.n >= static_cast<std::size_t>(k.arity()) || !cfg.sample.empty()) {
    const auto sample = sample_points(cfg, law);
    const double dev = decomposition_check(k, *dist, sample);
    const double scale = std::max(1.0, norm(complete(k, sample)));
    res["decomposition_deviation"] = dev;
    res["decomposition_relative"] = dev / scale;
    if (dev / scale > 1e-10) {
      run.log() << "decomposition identity deviates by " << dev / scale << "\n";
      status = kExitViolation;
    }
  }
  return run.finish(started, res, status);
}

RunOutcome run_tailscan(const Config& cfg, Run& run, const std::string& started) {
  TailScanConfig tc{ReplicateSpec{.kernel = build_kernel(cfg),
                                   .law = build_sampler(cfg.distribution),
                                   .n = cfg.n,
                                   .replicas = cfg.replicas,
                                   .seed = cfg.seed,
                                   .threads = run.threads()}};
  tc.x_grid = cfg.x_grid.values();
  tc.degeneracy = cfg.kernel.degeneracy;
  tc.running_max = cfg.statistic == "running-max";
  tc.window_lo = cfg.tolerance.window_lo;
  tc.window_hi = cfg.tolerance.window_hi;
  tc.min_fit_points = cfg.tolerance.min_fit_points;
  if (cfg.envelope) {
    const auto& e = *cfg.envelope;
    BoundEnvelope env = BoundEnvelope::with_defaults(e.a, e.b, e.c, e.y, tc.rep.kernel.arity());
    if (e.log_power) env.log_power = *e.log_power;
    tc.envelope = env;
  }
  const TailScanReport rep = tail_scan(tc);

  Table t;
  t.columns = {"x", "p_hat", "ci_lo", "ci_hi", "envelope"};
  for (const auto& p : rep.points) t.add({num(p.x), num(p.p_hat), num(p.ci_lo), num(p.ci_hi), num(p.envelope)});
  run.emit("tailscan", t);

  json res;
  res["m"] = rep.m;
  res["d"] = rep.d;
  res["replicas"] = rep.replicas;
  res["scale"] = rep.scale;
  res["normalization"] = rep.normalization;
  res["fit_available"] = rep.fit_available;
  res["beta"] = finite_or_null(rep.beta);
  res["fit_r2"] = finite_or_null(rep.fit.r2);
  res["fit_points"] = rep.fit.points;
  res["window"] = {rep.window_lo, rep.window_hi};
  res["sup_bound_violations"] = rep.sup_bound_violations;
  run.log() << "tailscan: beta = " << (rep.fit_available ? num(rep.beta) : "n/a") << " over "
            << rep.fit.points << " points\n";
  int status = kExitOk;
  if (rep.sup_bound_violations > 0) {
    run.log() << "declared sup-bound exceeded in " << rep.sup_bound_violations << " spot checks\n";
    status = kExitViolation;
  }
  return run.finish(started, res, status);
}

RunOutcome run_incomplete(const Config& cfg, Run& run, const std::string& started) {
  const auto& sc = *cfg.scaling;
  ScalingConfig c{.kernel = build_kernel(cfg), .law = build_sampler(cfg.distribution)};
  c.degeneracy = cfg.kernel.degeneracy;
  c.replicas = cfg.replicas;
  c.seed = cfg.seed;
  c.threads = run.threads();
  c.q = sc.quantile;
  const int m = c.kernel.arity();
  for (std::size_t n : sc.n) {
    for (std::uint64_t big_n : sc.draws) {
      DesignConfig d;
      d.kind = sc.design;
      d.draws = big_n;
      c.cells.push_back({n, build_design(d)});
      const double p = static_cast<double>(big_n) / std::pow(static_cast<double>(n), m);
      if (sc.bernoulli_match && p <= 1.0) c.cells.push_back({n, SamplingDesign::bernoulli(p)});
    }
  }
  const auto rows = incomplete_scaling_experiment(c);

  Table t;
  t.columns = {"n",          "design",       "m",          "d",
               "normalization", "quantile",  "normalized", "normalized_indicator",
               "mean_distinct", "empty",     "unbiased_mean", "unbiased_target",
               "unbiased_se",   "unbiased_z", "unbiased_ok"};
  bool unbiased = true;
  double lo = INFINITY, hi = 0.0;
  json matching = json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    t.add({std::to_string(r.n), r.design.to_string(), std::to_string(r.m), std::to_string(r.d),
           num(r.normalization), num(r.quantile), num(r.normalized), num(r.normalized_indicator),
           num(r.mean_distinct), std::to_string(r.empty), num(r.unbiased_mean),
           num(r.unbiased_target), num(r.unbiased_se), num(r.unbiased_z), flag(r.unbiased_ok)});
    unbiased = unbiased && r.unbiased_ok;
    if (r.normalized_indicator > 0.0) {
      lo = std::min(lo, r.normalized_indicator);
      hi = std::max(hi, r.normalized_indicator);
    }
    // A Bernoulli cell directly follows its matching fixed-size cell.
    if (r.design.kind == SamplingDesign::Kind::kBernoulli && i > 0) {
      const auto& f = rows[i - 1];
      matching.push_back({{"n", r.n},
                          {"N", f.design.draws},
                          {"p", r.design.p},
                          {"normalization_fixed", f.normalization},
                          {"normalization_bernoulli", r.normalization},
                          {"normalized_fixed", f.normalized_indicator},
                          {"normalized_bernoulli", r.normalized_indicator}});
    }
  }
  run.emit("incomplete-compare", t);

  json res;
  res["cells"] = rows.size();
  res["quantile_level"] = sc.quantile;
  res["normalized_ratio"] = finite_or_null(hi / lo);
  res["max_ratio"] = sc.max_ratio;
  res["ratio_ok"] = hi / lo <= sc.max_ratio;
  res["unbiased_all"] = unbiased;
  res["matching"] = matching;
  run.log() << "incomplete-compare: max/min normalized quantile " << num(hi / lo) << "\n";
  if (!unbiased) run.log() << "design unbiasedness failed in at least one cell\n";
  return run.finish(started, res, unbiased ? kExitOk : kExitViolation);
}

RunOutcome run_decouple(const Config& cfg, Run& run, const std::string& started) {
  DecoupleConfig c{.kernel = build_kernel(cfg), .law = build_sampler(cfg.distribution)};
  c.n = cfg.n;
  c.replicas = cfg.replicas;
  c.seed = cfg.seed;
  c.threads = run.threads();
  c.x_grid = cfg.x_grid.values();
  const DecoupleReport rep = decouple_compare(c);

  Table t;
  t.columns = {"x", "p_complete", "p_decoupled", "usable"};
  for (const auto& p : rep.points) t.add({num(p.x), num(p.p_complete), num(p.p_decoupled), flag(p.usable)});
  run.emit("decouple-compare", t);

  json res;
  res["replicas"] = rep.replicas;
  res["usable_points"] = rep.usable_points;
  res["k_defined"] = rep.k_defined;
  res["fitted_k"] = finite_or_null(rep.fitted_k);
  res["k_finite"] = std::isfinite(rep.fitted_k);
  res["domination_holds"] = rep.domination_holds;
  run.log() << "decouple-compare: fitted K = "
            << (rep.k_defined ? num(rep.fitted_k) : std::string("undefined (empty usable grid)"))
            << "\n";
  return run.finish(started, res, kExitOk);
}

RunOutcome run_martingale(const Config& cfg, Run& run, const std::string& started) {
  const auto& mc = *cfg.martingale;
  const auto gen = *parse_generator(mc.generator);
  const SpacePtr space = mc.dim == 1 ? HilbertSpace::real_line() : HilbertSpace::euclidean(mc.dim);
  const auto paths =
      simulate_summaries(gen, mc.n, space, cfg.replicas, cfg.seed, run.threads());

  json res;
  res["generator"] = mc.generator;
  res["n"] = mc.n;
  res["dim"] = mc.dim;
  res["paths"] = cfg.replicas;
  json variants = json::object();
  std::size_t total = 0;
  for (const auto& name : mc.variants) {
    const auto v = *parse_variant(name);
    if (v == InequalityVariant::kReal && mc.dim != 1) {
      run.log() << "martingale-verify: skipping real variant for dim " << mc.dim << "\n";
      variants[name] = {{"skipped", "paths are not real-valued"}};
      continue;
    }
    const auto xs = v == InequalityVariant::kConv && !mc.t.values().empty() ? mc.t.values()
                                                                              : mc.x.values();
    const auto ys = mc.y.values();
    if (v != InequalityVariant::kConv && ys.empty())
      throw ConfigError("martingale.y", 0, "variant " + name + " needs a y grid");
    const InequalityReport rep = verify_grid(paths, v, xs, ys);

    Table t;
    t.columns = {"x", "y", "lhs", "lhs_ci_hi", "rhs", "rhs_ci_lo", "violated", "lhs_ci_lo", "rhs_ci_hi"};
    for (const auto& e : rep.entries)
      t.add({num(e.x), num(e.y), num(e.lhs), num(e.lhs_ci_hi), num(e.rhs), num(e.rhs_ci_lo),
             flag(e.violated), num(e.lhs_ci_lo), num(e.rhs_ci_hi)});
    run.emit("martingale-" + name, t);
    variants[name] = {{"cells", rep.entries.size()}, {"violations", rep.violations}};
    total += rep.violations;
    run.log() << "martingale-verify " << name << ": " << rep.violations << " violations over "
              << rep.entries.size() << " cells\n";
  }
  res["variants"] = variants;
  res["violations"] = total;
  return run.finish(started, res, total == 0 ? kExitOk : kExitViolation);
}

}  // namespace

Config effective_config(const RunOptions& o) {
  Config cfg;
  LineMap lines;
  if (o.config_path) {
    cfg = parse_config_file(*o.config_path, &lines);
    if (lines.count("experiment") && cfg.experiment != o.subcommand)
      throw ConfigError("experiment", lines["experiment"],
                        "config is for '" + cfg.experiment + "' but subcommand is '" +
                            o.subcommand + "'");
  }
  cfg.experiment = o.subcommand;
  if (o.seed) cfg.seed = *o.seed;
  if (o.threads) cfg.threads = *o.threads;
  if (o.out) cfg.output = *o.out;
  if (o.kernel) cfg.kernel.name = *o.kernel;
  if (o.n) cfg.n = *o.n;
  if (o.design) cfg.design = parse_design_flag(*o.design);
  if (o.weights_file) cfg.weights_file = *o.weights_file;
  if (o.sample) cfg.sample = parse_sample_flag(*o.sample);
  if (o.m) {
    if (cfg.kernel.name == "zero") {
      cfg.kernel.arity = *o.m;
    } else {
      const int arity = build_kernel(cfg).arity();
      if (arity != *o.m)
        throw ConfigError("m", 0, "kernel '" + cfg.kernel.name + "' has arity " +
                                      std::to_string(arity));
    }
  }
  if (cfg.experiment == "martingale-verify") {
    if (!cfg.martingale) cfg.martingale = MartingaleConfig{};
    if (o.variant) cfg.martingale->variants = {*o.variant};
    if (o.grid_file) {
      const GridFile g = parse_grid_file(*o.grid_file);
      if (!g.x.values().empty()) cfg.martingale->x = g.x;
      if (!g.y.values().empty()) cfg.martingale->y = g.y;
      if (!g.t.values().empty()) cfg.martingale->t = g.t;
    }
  }
  validate(cfg, &lines);
  require_experiment_fields(cfg, &lines);
  return cfg;
}

RunOutcome run_experiment(const Config& cfg, std::ostream& log) {
  const std::string started = utc_now();
  Run run(cfg, log);
  const auto& e = cfg.experiment;
  if (e == "estimate") return run_estimate(cfg, run, started);
  if (e == "decompose") return run_decompose(cfg, run, started);
  if (e == "tailscan") return run_tailscan(cfg, run, started);
  if (e == "incomplete-compare") return run_incomplete(cfg, run, started);
  if (e == "decouple-compare") return run_decouple(cfg, run, started);
  if (e == "martingale-verify") return run_martingale(cfg, run, started);
  throw ConfigError("experiment", 0, "unknown experiment '" + e + "'");
}

int run(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const Config cfg = effective_config(opts);
    return run_experiment(cfg, out).status;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const BudgetError& e) {
    err << "budget exceeded: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace ustat::cli
