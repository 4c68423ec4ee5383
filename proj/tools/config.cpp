#include "config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "ustatlab/error.hpp"

namespace ustat::cli {

std::vector<double> GridSpec::values() const {
  if (!is_range()) return points;
  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double f = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    v[i] = log_spacing ? std::exp(std::log(from) + f * (std::log(to) - std::log(from)))
                       : from + f * (to - from);
  }
  return v;
}

namespace {

const std::set<std::string> kExperiments = {"estimate",         "decompose",
                                            "tailscan",         "incomplete-compare",
                                            "decouple-compare", "martingale-verify"};
const std::set<std::string> kKernels = {"gini",     "spatial-sign", "product",
                                        "identity", "zero",         "empirical-indicator"};
const std::set<std::string> kDistributions = {"rademacher", "uniform-grid", "finite",
                                              "discretized-gaussian"};
const std::set<std::string> kDesigns = {"with-replacement", "without-replacement", "bernoulli"};

class Parser {
 public:
  LineMap lines;

  static int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

  [[noreturn]] void fail(const std::string& key, const YAML::Node& n, const std::string& what) {
    throw ConfigError(key, line_of(n), what);
  }

  void require_map(const YAML::Node& n, const std::string& key) {
    if (!n.IsMap()) fail(key, n, "expected a mapping");
  }

  void check_keys(const YAML::Node& n, const std::string& prefix,
                  const std::set<std::string>& allowed) {
    for (const auto& kv : n) {
      const auto name = kv.first.as<std::string>();
      const std::string path = prefix.empty() ? name : prefix + "." + name;
      if (!allowed.count(name)) fail(path, kv.first, "unknown key");
      lines[path] = line_of(kv.first);
    }
  }

  template <typename T>
  T get(const YAML::Node& n, const std::string& key, const char* type) {
    if (!n.IsScalar()) fail(key, n, std::string("expected ") + type);
    try {
      return n.as<T>();
    } catch (const YAML::BadConversion&) {
      fail(key, n, std::string("expected ") + type);
    }
  }

  double real(const YAML::Node& n, const std::string& key) { return get<double>(n, key, "a number"); }
  std::string str(const YAML::Node& n, const std::string& key) {
    return get<std::string>(n, key, "a string");
  }
  bool boolean(const YAML::Node& n, const std::string& key) { return get<bool>(n, key, "a boolean"); }
  std::int64_t integer(const YAML::Node& n, const std::string& key) {
    return get<std::int64_t>(n, key, "an integer");
  }
  std::uint64_t count(const YAML::Node& n, const std::string& key) {
    if (n.IsScalar() && n.Scalar().starts_with('-')) {
      integer(n, key);
      fail(key, n, "must be >= 0");
    }
    return get<std::uint64_t>(n, key, "an integer");
  }

  std::vector<double> reals(const YAML::Node& n, const std::string& key) {
    if (!n.IsSequence()) fail(key, n, "expected a list of numbers");
    std::vector<double> v;
    for (const auto& e : n) v.push_back(real(e, key));
    return v;
  }

  std::vector<std::vector<double>> points(const YAML::Node& n, const std::string& key) {
    if (!n.IsSequence()) fail(key, n, "expected a list");
    std::vector<std::vector<double>> v;
    for (const auto& e : n) {
      if (e.IsSequence()) {
        v.push_back(reals(e, key));
      } else {
        v.push_back({real(e, key)});
      }
    }
    return v;
  }

  GridSpec grid(const YAML::Node& n, const std::string& key) {
    GridSpec g;
    if (n.IsSequence()) {
      g.points = reals(n, key);
      return g;
    }
    require_map(n, key);
    check_keys(n, key, {"from", "to", "count", "spacing"});
    for (const char* k : {"from", "to", "count"}) {
      if (!n[k]) fail(key + "." + k, n, "missing key");
    }
    g.from = real(n["from"], key + ".from");
    g.to = real(n["to"], key + ".to");
    g.count = count(n["count"], key + ".count");
    if (n["spacing"]) {
      const auto s = str(n["spacing"], key + ".spacing");
      if (s != "linear" && s != "log") fail(key + ".spacing", n["spacing"], "expected linear or log");
      g.log_spacing = s == "log";
    }
    return g;
  }

  DesignConfig design(const YAML::Node& n, const std::string& key) {
    require_map(n, key);
    check_keys(n, key, {"kind", "N", "p"});
    DesignConfig d;
    if (!n["kind"]) fail(key + ".kind", n, "missing key");
    d.kind = str(n["kind"], key + ".kind");
    if (!kDesigns.count(d.kind)) fail(key + ".kind", n["kind"], "unknown design '" + d.kind + "'");
    if (d.kind == "bernoulli") {
      if (!n["p"]) fail(key + ".p", n, "missing key");
      d.p = real(n["p"], key + ".p");
    } else {
      if (!n["N"]) fail(key + ".N", n, "missing key");
      d.draws = count(n["N"], key + ".N");
    }
    return d;
  }

  Config parse(const YAML::Node& root) {
    if (!root.IsMap()) throw ConfigError("", line_of(root), "top level must be a mapping");
    check_keys(root, "",
               {"version", "experiment", "seed", "replicas", "threads", "output", "kernel",
                "distribution", "n", "x_grid", "statistic", "design", "scaling", "martingale",
                "envelope", "tolerance", "sample", "weights_file"});
    Config c;
    if (!root["version"]) throw ConfigError("version", 0, "missing key");
    c.version = static_cast<int>(integer(root["version"], "version"));
    if (c.version != 1) fail("version", root["version"], "unsupported version (expected 1)");
    if (root["experiment"]) c.experiment = str(root["experiment"], "experiment");
    if (root["seed"]) c.seed = count(root["seed"], "seed");
    if (root["replicas"]) c.replicas = count(root["replicas"], "replicas");
    if (root["threads"]) c.threads = static_cast<int>(integer(root["threads"], "threads"));
    if (root["output"]) c.output = str(root["output"], "output");
    if (root["n"]) c.n = count(root["n"], "n");
    if (root["x_grid"]) c.x_grid = grid(root["x_grid"], "x_grid");
    if (root["statistic"]) c.statistic = str(root["statistic"], "statistic");
    if (root["sample"]) c.sample = points(root["sample"], "sample");
    if (root["weights_file"]) c.weights_file = str(root["weights_file"], "weights_file");

    if (const auto k = root["kernel"]) {
      require_map(k, "kernel");
      check_keys(k, "kernel", {"name", "grid", "arity", "sup_bound", "degeneracy"});
      if (k["name"]) c.kernel.name = str(k["name"], "kernel.name");
      if (k["grid"]) c.kernel.grid = count(k["grid"], "kernel.grid");
      if (k["arity"]) c.kernel.arity = static_cast<int>(integer(k["arity"], "kernel.arity"));
      if (k["sup_bound"]) c.kernel.sup_bound = real(k["sup_bound"], "kernel.sup_bound");
      if (k["degeneracy"])
        c.kernel.degeneracy = static_cast<int>(integer(k["degeneracy"], "kernel.degeneracy"));
    }
    if (const auto d = root["distribution"]) {
      require_map(d, "distribution");
      check_keys(d, "distribution", {"kind", "k", "dim", "atoms", "probs"});
      if (d["kind"]) c.distribution.kind = str(d["kind"], "distribution.kind");
      if (d["k"]) c.distribution.k = static_cast<int>(integer(d["k"], "distribution.k"));
      if (d["dim"]) c.distribution.dim = count(d["dim"], "distribution.dim");
      if (d["atoms"]) c.distribution.atoms = points(d["atoms"], "distribution.atoms");
      if (d["probs"]) c.distribution.probs = reals(d["probs"], "distribution.probs");
    }
    if (root["design"]) c.design = design(root["design"], "design");
    if (const auto s = root["scaling"]) {
      require_map(s, "scaling");
      check_keys(s, "scaling", {"n", "N", "design", "quantile", "bernoulli_match", "max_ratio"});
      ScalingConfigFile sc;
      if (s["n"]) {
        for (double v : reals(s["n"], "scaling.n")) sc.n.push_back(static_cast<std::size_t>(v));
      }
      if (s["N"]) {
        for (double v : reals(s["N"], "scaling.N")) sc.draws.push_back(static_cast<std::uint64_t>(v));
      }
      if (s["design"]) sc.design = str(s["design"], "scaling.design");
      if (s["quantile"]) sc.quantile = real(s["quantile"], "scaling.quantile");
      if (s["bernoulli_match"]) sc.bernoulli_match = boolean(s["bernoulli_match"], "scaling.bernoulli_match");
      if (s["max_ratio"]) sc.max_ratio = real(s["max_ratio"], "scaling.max_ratio");
      c.scaling = sc;
    }
    if (const auto m = root["martingale"]) {
      require_map(m, "martingale");
      check_keys(m, "martingale", {"generator", "n", "dim", "variants", "x", "y", "t"});
      MartingaleConfig mc;
      if (m["generator"]) mc.generator = str(m["generator"], "martingale.generator");
      if (m["n"]) mc.n = count(m["n"], "martingale.n");
      if (m["dim"]) mc.dim = count(m["dim"], "martingale.dim");
      if (m["variants"]) {
        if (!m["variants"].IsSequence()) fail("martingale.variants", m["variants"], "expected a list");
        mc.variants.clear();
        for (const auto& v : m["variants"]) mc.variants.push_back(str(v, "martingale.variants"));
      }
      if (m["x"]) mc.x = grid(m["x"], "martingale.x");
      if (m["y"]) mc.y = grid(m["y"], "martingale.y");
      if (m["t"]) mc.t = grid(m["t"], "martingale.t");
      c.martingale = mc;
    }
    if (const auto e = root["envelope"]) {
      require_map(e, "envelope");
      check_keys(e, "envelope", {"A", "B", "C", "y", "log_power"});
      EnvelopeConfig ec;
      if (e["A"]) ec.a = real(e["A"], "envelope.A");
      if (e["B"]) ec.b = real(e["B"], "envelope.B");
      if (e["C"]) ec.c = real(e["C"], "envelope.C");
      if (e["y"]) ec.y = real(e["y"], "envelope.y");
      if (e["log_power"]) ec.log_power = real(e["log_power"], "envelope.log_power");
      c.envelope = ec;
    }
    if (const auto t = root["tolerance"]) {
      require_map(t, "tolerance");
      check_keys(t, "tolerance", {"degeneracy", "window_lo", "window_hi", "min_fit_points"});
      if (t["degeneracy"]) c.tolerance.degeneracy = real(t["degeneracy"], "tolerance.degeneracy");
      if (t["window_lo"]) c.tolerance.window_lo = real(t["window_lo"], "tolerance.window_lo");
      if (t["window_hi"]) c.tolerance.window_hi = real(t["window_hi"], "tolerance.window_hi");
      if (t["min_fit_points"])
        c.tolerance.min_fit_points = count(t["min_fit_points"], "tolerance.min_fit_points");
    }
    return c;
  }
};

int line_for(const LineMap* lines, const std::string& key) {
  if (!lines) return 0;
  const auto it = lines->find(key);
  return it == lines->end() ? 0 : it->second;
}

void check_grid(const GridSpec& g, const std::string& key, const LineMap* lines) {
  if (g.is_range()) {
    if (!(g.from > 0.0) || !(g.to > g.from) || !std::isfinite(g.to))
      throw ConfigError(key, line_for(lines, key), "range needs 0 < from < to");
    if (g.count < 2) throw ConfigError(key, line_for(lines, key), "range needs count >= 2");
  }
  const auto v = g.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0) || !std::isfinite(v[i]) || (i > 0 && v[i] <= v[i - 1]))
      throw ConfigError(key, line_for(lines, key), "grid must be positive and strictly increasing");
  }
}

}  // namespace

void validate(const Config& c, const LineMap* lines) {
  const auto bad = [&](const std::string& key, const std::string& what) {
    throw ConfigError(key, line_for(lines, key), what);
  };
  if (c.version != 1) bad("version", "unsupported version (expected 1)");
  if (!kExperiments.count(c.experiment)) bad("experiment", "unknown experiment '" + c.experiment + "'");
  if (c.replicas < kMinReplicas) bad("replicas", "must be >= " + std::to_string(kMinReplicas));
  if (c.threads < 0) bad("threads", "must be >= 0");
  if (c.output.empty()) bad("output", "must not be empty");

  if (!kKernels.count(c.kernel.name)) bad("kernel.name", "unknown kernel '" + c.kernel.name + "'");
  if (c.kernel.grid < 1) bad("kernel.grid", "must be >= 1");
  if (c.kernel.arity < 0 || c.kernel.arity > kMaxArity) bad("kernel.arity", "must lie in [1, 8]");
  if (c.kernel.sup_bound && !(*c.kernel.sup_bound >= 0.0)) bad("kernel.sup_bound", "must be >= 0");
  if (c.kernel.degeneracy && *c.kernel.degeneracy < 1) bad("kernel.degeneracy", "must be >= 1");

  const auto& d = c.distribution;
  if (!kDistributions.count(d.kind)) bad("distribution.kind", "unknown distribution '" + d.kind + "'");
  if (d.kind == "uniform-grid" && d.k < 2) bad("distribution.k", "must be >= 2");
  if (d.dim < 1) bad("distribution.dim", "must be >= 1");
  if (d.kind == "finite") {
    if (d.atoms.empty()) bad("distribution.atoms", "finite law needs atoms");
    if (d.probs.size() != d.atoms.size()) bad("distribution.probs", "needs one probability per atom");
  }

  if (c.design) {
    const auto& g = *c.design;
    if (!kDesigns.count(g.kind)) bad("design.kind", "unknown design '" + g.kind + "'");
    if (g.kind == "bernoulli" && !(g.p > 0.0 && g.p <= 1.0))
      bad("design.p", "must lie in (0, 1], got " + std::to_string(g.p));
    if (g.kind != "bernoulli" && g.draws < 1) bad("design.N", "must be >= 1");
  }
  if (!c.x_grid.points.empty() || c.x_grid.is_range()) check_grid(c.x_grid, "x_grid", lines);
  if (c.statistic != "running-max" && c.statistic != "final")
    bad("statistic", "expected running-max or final");

  const auto& t = c.tolerance;
  if (!(t.degeneracy >= 0.0)) bad("tolerance.degeneracy", "must be >= 0");
  if (!(t.window_lo > 0.0 && t.window_lo < t.window_hi && t.window_hi < 1.0))
    bad("tolerance.window_lo", "window needs 0 < lo < hi < 1");
  if (t.min_fit_points < 2) bad("tolerance.min_fit_points", "must be >= 2");

  if (c.scaling) {
    const auto& s = *c.scaling;
    if (s.n.empty()) bad("scaling.n", "needs at least one sample size");
    if (s.draws.empty()) bad("scaling.N", "needs at least one selection size");
    if (s.design != "with-replacement" && s.design != "without-replacement")
      bad("scaling.design", "expected with-replacement or without-replacement");
    if (!(s.quantile > 0.0 && s.quantile < 1.0)) bad("scaling.quantile", "must lie in (0, 1)");
    if (!(s.max_ratio >= 1.0)) bad("scaling.max_ratio", "must be >= 1");
  }
  if (c.martingale) {
    const auto& m = *c.martingale;
    if (!parse_generator(m.generator)) bad("martingale.generator", "unknown generator '" + m.generator + "'");
    if (m.n < 1) bad("martingale.n", "must be >= 1");
    if (m.dim < 1) bad("martingale.dim", "must be >= 1");
    for (const auto& v : m.variants) {
      if (!parse_variant(v)) bad("martingale.variants", "unknown variant '" + v + "'");
    }
    check_grid(m.x, "martingale.x", lines);
    check_grid(m.y, "martingale.y", lines);
    check_grid(m.t, "martingale.t", lines);
  }
  if (c.envelope) {
    const auto& e = *c.envelope;
    if (!(e.a > 0.0 && e.c > 0.0 && e.y > 0.0 && e.b >= 0.0))
      bad("envelope", "A, C, y must be > 0 and B >= 0");
    if (e.log_power && !(*e.log_power >= 0.0)) bad("envelope.log_power", "must be >= 0");
  }

}

void require_experiment_fields(const Config& c, const LineMap* lines) {
  const auto bad = [&](const std::string& key, const std::string& what) {
    throw ConfigError(key, line_for(lines, key), what);
  };
  if (c.experiment == "tailscan" || c.experiment == "decouple-compare") {
    if (c.n < 1) bad("n", "required by " + c.experiment);
    if (c.x_grid.values().empty()) bad("x_grid", "required by " + c.experiment);
  }
  if (c.experiment == "incomplete-compare" && !c.scaling) bad("scaling", "required by incomplete-compare");
  if (c.experiment == "martingale-verify") {
    if (!c.martingale) bad("martingale", "required by martingale-verify");
    if (c.martingale->x.values().empty() && c.martingale->t.values().empty())
      bad("martingale.x", "needs an x grid (or a t grid for conv)");
  }
  if (c.experiment == "estimate" && c.n < 1 && c.sample.empty())
    bad("n", "estimate needs n or an explicit sample");
}

Config parse_config_string(const std::string& text, LineMap* lines) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("", e.mark.line + 1, e.msg);
  }
  Parser p;
  Config c = p.parse(root);
  validate(c, &p.lines);
  if (lines) *lines = p.lines;
  return c;
}

GridFile parse_grid_file(const std::string& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::BadFile&) {
    throw ConfigError("", 0, "cannot read grid file '" + path + "'");
  } catch (const YAML::ParserException& e) {
    throw ConfigError("", e.mark.line + 1, e.msg);
  }
  Parser p;
  p.require_map(root, "grid file");
  p.check_keys(root, "", {"x", "y", "t"});
  GridFile g;
  if (root["x"]) g.x = p.grid(root["x"], "x");
  if (root["y"]) g.y = p.grid(root["y"], "y");
  if (root["t"]) g.t = p.grid(root["t"], "t");
  check_grid(g.x, "x", &p.lines);
  check_grid(g.y, "y", &p.lines);
  check_grid(g.t, "t", &p.lines);
  return g;
}

Config parse_config_file(const std::string& path, LineMap* lines) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", 0, "cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_string(ss.str(), lines);
}

namespace {

void emit_grid(YAML::Emitter& out, const char* key, const GridSpec& g) {
  if (g.points.empty() && !g.is_range()) return;
  out << YAML::Key << key << YAML::Value;
  if (!g.points.empty()) {
    out << YAML::Flow << g.points;
    return;
  }
  out << YAML::BeginMap << YAML::Key << "from" << YAML::Value << g.from << YAML::Key << "to"
      << YAML::Value << g.to << YAML::Key << "count" << YAML::Value << g.count << YAML::Key
      << "spacing" << YAML::Value << (g.log_spacing ? "log" : "linear") << YAML::EndMap;
}

void emit_points(YAML::Emitter& out, const std::vector<std::vector<double>>& pts) {
  out << YAML::BeginSeq;
  for (const auto& p : pts) {
    if (p.size() == 1) {
      out << p[0];
    } else {
      out << YAML::Flow << p;
    }
  }
  out << YAML::EndSeq;
}

}  // namespace

std::string emit_config(const Config& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "version" << YAML::Value << c.version;
  out << YAML::Key << "experiment" << YAML::Value << c.experiment;
  out << YAML::Key << "seed" << YAML::Value << c.seed;
  out << YAML::Key << "replicas" << YAML::Value << c.replicas;
  out << YAML::Key << "threads" << YAML::Value << c.threads;
  out << YAML::Key << "output" << YAML::Value << c.output;

  out << YAML::Key << "kernel" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << c.kernel.name;
  out << YAML::Key << "grid" << YAML::Value << c.kernel.grid;
  if (c.kernel.arity != 0) out << YAML::Key << "arity" << YAML::Value << c.kernel.arity;
  if (c.kernel.sup_bound) out << YAML::Key << "sup_bound" << YAML::Value << *c.kernel.sup_bound;
  if (c.kernel.degeneracy) out << YAML::Key << "degeneracy" << YAML::Value << *c.kernel.degeneracy;
  out << YAML::EndMap;

  out << YAML::Key << "distribution" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << c.distribution.kind;
  out << YAML::Key << "k" << YAML::Value << c.distribution.k;
  out << YAML::Key << "dim" << YAML::Value << c.distribution.dim;
  if (!c.distribution.atoms.empty()) {
    out << YAML::Key << "atoms" << YAML::Value;
    emit_points(out, c.distribution.atoms);
  }
  if (!c.distribution.probs.empty())
    out << YAML::Key << "probs" << YAML::Value << YAML::Flow << c.distribution.probs;
  out << YAML::EndMap;

  out << YAML::Key << "n" << YAML::Value << c.n;
  emit_grid(out, "x_grid", c.x_grid);
  out << YAML::Key << "statistic" << YAML::Value << c.statistic;

  if (c.design) {
    out << YAML::Key << "design" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << c.design->kind;
    if (c.design->kind == "bernoulli") {
      out << YAML::Key << "p" << YAML::Value << c.design->p;
    } else {
      out << YAML::Key << "N" << YAML::Value << c.design->draws;
    }
    out << YAML::EndMap;
  }
  if (c.scaling) {
    const auto& s = *c.scaling;
    out << YAML::Key << "scaling" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "n" << YAML::Value << YAML::Flow << s.n;
    out << YAML::Key << "N" << YAML::Value << YAML::Flow << s.draws;
    out << YAML::Key << "design" << YAML::Value << s.design;
    out << YAML::Key << "quantile" << YAML::Value << s.quantile;
    out << YAML::Key << "bernoulli_match" << YAML::Value << s.bernoulli_match;
    out << YAML::Key << "max_ratio" << YAML::Value << s.max_ratio;
    out << YAML::EndMap;
  }
  if (c.martingale) {
    const auto& m = *c.martingale;
    out << YAML::Key << "martingale" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "generator" << YAML::Value << m.generator;
    out << YAML::Key << "n" << YAML::Value << m.n;
    out << YAML::Key << "dim" << YAML::Value << m.dim;
    out << YAML::Key << "variants" << YAML::Value << YAML::Flow << m.variants;
    emit_grid(out, "x", m.x);
    emit_grid(out, "y", m.y);
    emit_grid(out, "t", m.t);
    out << YAML::EndMap;
  }
  if (c.envelope) {
    const auto& e = *c.envelope;
    out << YAML::Key << "envelope" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "A" << YAML::Value << e.a << YAML::Key << "B" << YAML::Value << e.b;
    out << YAML::Key << "C" << YAML::Value << e.c << YAML::Key << "y" << YAML::Value << e.y;
    if (e.log_power) out << YAML::Key << "log_power" << YAML::Value << *e.log_power;
    out << YAML::EndMap;
  }
  out << YAML::Key << "tolerance" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "degeneracy" << YAML::Value << c.tolerance.degeneracy;
  out << YAML::Key << "window_lo" << YAML::Value << c.tolerance.window_lo;
  out << YAML::Key << "window_hi" << YAML::Value << c.tolerance.window_hi;
  out << YAML::Key << "min_fit_points" << YAML::Value << c.tolerance.min_fit_points;
  out << YAML::EndMap;
  if (!c.sample.empty()) {
    out << YAML::Key << "sample" << YAML::Value;
    emit_points(out, c.sample);
  }
  if (!c.weights_file.empty()) out << YAML::Key << "weights_file" << YAML::Value << c.weights_file;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

KernelSpec build_kernel(const Config& c) {
  const SamplerSpec law = build_sampler(c.distribution);
  const auto& k = c.kernel;
  std::optional<KernelSpec> out;
  try {
    if (k.name == "gini") {
      out = gini_kernel();
    } else if (k.name == "spatial-sign") {
      out = spatial_sign_kernel(law.space());
    } else if (k.name == "product") {
      out = product_kernel();
    } else if (k.name == "identity") {
      out = identity_kernel(law.space());
    } else if (k.name == "zero") {
      out = zero_kernel(k.arity > 0 ? k.arity : 2);
    } else if (k.name == "empirical-indicator") {
      const auto finite = law.as_finite();
      if (!finite) throw ConfigError("kernel.name", 0, "empirical-indicator needs a finite law");
      out = empirical_indicator_kernel(cdf_on_midpoint_grid(*finite, k.grid));
    } else {
      throw ConfigError("kernel.name", 0, "unknown kernel '" + k.name + "'");
    }
    if (k.sup_bound) out = out->with_sup_bound(*k.sup_bound);
    if (k.degeneracy) out = out->with_declared_degeneracy(*k.degeneracy);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("kernel", 0, e.what());
  }
  return *out;
}

SamplerSpec build_sampler(const DistributionConfig& d) {
  try {
    SamplerSpec s;
    if (d.kind == "rademacher") {
      s = SamplerSpec::rademacher();
    } else if (d.kind == "uniform-grid") {
      s = SamplerSpec::uniform_grid(d.k);
    } else if (d.kind == "discretized-gaussian") {
      s = SamplerSpec::discretized_gaussian(d.dim);
    } else if (d.kind == "finite") {
      if (d.atoms.empty()) throw ConfigError("distribution.atoms", 0, "finite law needs atoms");
      const std::size_t dim = d.atoms.front().size();
      const SpacePtr space = dim == 1 ? HilbertSpace::real_line() : HilbertSpace::euclidean(dim);
      std::vector<HilbertPoint> atoms;
      for (const auto& a : d.atoms) atoms.emplace_back(space, a);
      s = SamplerSpec::from_finite(FiniteDistribution(std::move(atoms), d.probs));
    } else {
      throw ConfigError("distribution.kind", 0, "unknown distribution '" + d.kind + "'");
    }
    s.validate();
    return s;
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("distribution", 0, e.what());
  }
}

SamplingDesign build_design(const DesignConfig& d) {
  if (d.kind == "with-replacement") return SamplingDesign::with_replacement(d.draws);
  if (d.kind == "without-replacement") return SamplingDesign::without_replacement(d.draws);
  if (d.kind == "bernoulli") return SamplingDesign::bernoulli(d.p);
  throw ConfigError("design.kind", 0, "unknown design '" + d.kind + "'");
}

DesignConfig parse_design_flag(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw ConfigError("design", 0, "expected KIND:VALUE, e.g. with-replacement:100");
  DesignConfig d;
  d.kind = text.substr(0, colon);
  const std::string value = text.substr(colon + 1);
  if (!kDesigns.count(d.kind)) throw ConfigError("design", 0, "unknown design '" + d.kind + "'");
  try {
    std::size_t used = 0;
    if (d.kind == "bernoulli") {
      d.p = std::stod(value, &used);
      if (!(d.p > 0.0 && d.p <= 1.0)) throw ConfigError("design.p", 0, "must lie in (0, 1]");
    } else {
      const long long v = std::stoll(value, &used);
      if (v < 1) throw ConfigError("design.N", 0, "must be >= 1");
      d.draws = static_cast<std::uint64_t>(v);
    }
    if (used != value.size()) throw std::invalid_argument("trailing characters");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("design", 0, "bad value '" + value + "'");
  }
  return d;
}

}  // namespace ustat::cli
