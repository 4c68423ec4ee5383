// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria (0 when all pass). An optional argument selects criteria,
// e.g. `acceptance 1,2,8`; USTATLAB_ACCEPTANCE_OUT sets the scratch dir.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../unit/property.hpp"
#include "config.hpp"
#include "runner.hpp"
#include "ustatlab/combinatorics.hpp"
#include "ustatlab/hoeffding.hpp"
#include "ustatlab/kernels.hpp"
#include "ustatlab/ustats.hpp"

namespace fs = std::filesystem;
using namespace ustat;
using ustat::testing::Gen;
using nlohmann::json;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

fs::path scratch_root() {
  const char* env = std::getenv("USTATLAB_ACCEPTANCE_OUT");
  return env ? fs::path(env) : fs::temp_directory_path() / "ustatlab_acceptance";
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Symmetric pseudo-random kernel into R^2: a hash of the sorted argument
// values, so every table entry is an arbitrary number.
KernelSpec random_kernel(int m, std::uint64_t salt) {
  return KernelSpec(
      "random", m, HilbertSpace::euclidean(2),
      [m, salt](ArgRefs a, std::span<double> out) {
        std::vector<double> v;
        for (int i = 0; i < m; ++i) v.push_back(a[i]->value());
        std::sort(v.begin(), v.end());
        std::uint64_t h = salt;
        for (double x : v) {
          std::uint64_t bits;
          std::memcpy(&bits, &x, sizeof bits);
          h = mix64(h ^ bits);
        }
        out[0] = static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 - 1.0;
        out[1] = static_cast<double>(mix64(h) >> 11) * 0x1.0p-53 * 4.0 - 2.0;
      },
      true);
}

KernelSpec pick_kernel(Gen& g, int m) {
  const int which = g.int_in(0, 2);
  if (which == 1 && m == 2) return g.int_in(0, 1) ? gini_kernel() : product_kernel();
  if (which == 2 && m == 1) return identity_kernel(HilbertSpace::real_line());
  return random_kernel(m, g.rng().next_u64());
}

Verdict check_decomposition() {
  double worst = 0.0;
  ustat::testing::for_cases(0xD3C0, 50, [&](Gen& g, int) {
    const int m = g.int_in(1, 3);
    const auto dist = g.finite_scalar(5);
    const auto k = pick_kernel(g, m);
    const auto sample = g.atoms_sample(dist, static_cast<std::size_t>(g.int_in(m, 12)));
    const double dev = decomposition_check(k, dist, sample);
    worst = std::max(worst, dev / std::max(1.0, norm(complete(k, sample))));
  });
  return {worst <= 1e-10, "50 cases, max relative deviation " + fmt("%.3g", worst)};
}

Verdict check_degeneracy() {
  const auto rad = FiniteDistribution::rademacher();
  const auto uni = FiniteDistribution::uniform_grid(3);
  struct Case {
    const char* name;
    KernelSpec k;
    const FiniteDistribution& d;
    int expect;
  };
  const std::vector<Case> cases{{"gini/rademacher", gini_kernel(), rad, 2},
                                {"gini/uniform3", gini_kernel(), uni, 1},
                                {"product/rademacher", product_kernel(), rad, 2},
                                {"product/uniform3", product_kernel(), uni, 2}};
  bool ok = true;
  double worst = 0.0;
  std::string found;
  for (const auto& c : cases) {
    const auto rep = degeneracy_order(c.k, c.d);
    ok = ok && rep.order == c.expect;
    found += std::string(found.empty() ? "" : ", ") + c.name + " d=" + std::to_string(rep.order);
    for (int j = 1; j < rep.order; ++j) worst = std::max(worst, rep.residual[j]);
    if (rep.centered) worst = std::max(worst, rep.residual[0]);
  }
  ok = ok && worst <= 1e-12;
  return {ok, found + "; max vanishing residual " + fmt("%.3g", worst)};
}

Verdict check_embedding() {
  double worst = 0.0;
  ustat::testing::for_cases(0xE3B, 20, [&](Gen& g, int) {
    const int m = g.int_in(1, 3);
    const auto n = static_cast<std::size_t>(g.int_in(m, 10));
    const auto sample = g.points(HilbertSpace::real_line(), n);
    worst = std::max(worst, running_max_embedding_check(pick_kernel(g, m), sample));
  });
  return {worst <= 1e-12, "20 cases, max deviation " + fmt("%.3g", worst)};
}

cli::Config base_config(const std::string& experiment, const std::string& dir, int threads = 0) {
  cli::Config c;
  c.experiment = experiment;
  c.seed = 20240601;
  c.threads = threads;
  c.output = (scratch_root() / dir).string();
  return c;
}

json run(const cli::Config& c, int* status = nullptr) {
  cli::validate(c);
  cli::require_experiment_fields(c);
  std::ostringstream log;
  const auto outcome = cli::run_experiment(c, log);
  if (status) *status = outcome.status;
  return outcome.manifest;
}

cli::GridSpec log_grid(double from, double to, std::size_t count) {
  cli::GridSpec g;
  g.from = from;
  g.to = to;
  g.count = count;
  g.log_spacing = true;
  return g;
}

Verdict check_tail_exponent() {
  auto c2 = base_config("tailscan", "tail-m2");
  c2.replicas = 100'000;
  c2.n = 40;
  c2.kernel.name = "product";
  c2.x_grid = log_grid(0.01, 20.0, 60);
  const json r2 = run(c2)["results"];

  auto c1 = c2;
  c1.output = (scratch_root() / "tail-m1").string();
  c1.kernel.name = "identity";
  c1.x_grid = log_grid(0.01, 6.0, 60);
  const json r1 = run(c1)["results"];

  const auto beta = [](const json& r) { return r["beta"].is_null() ? NAN : r["beta"].get<double>(); };
  const double b2 = beta(r2), b1 = beta(r1);
  const bool ok = std::abs(b2 - 1.0) <= 0.25 && std::abs(b1 - 2.0) <= 0.3;
  return {ok, "m=2 beta " + fmt("%.4f", b2) + " (target 1 +- 0.25), m=1 beta " + fmt("%.4f", b1) +
                  " (target 2 +- 0.3)"};
}

Verdict check_martingale() {
  std::size_t total = 0;
  std::string detail;
  struct Suite {
    const char* generator;
    std::size_t n, dim;
  };
  for (const Suite s : {Suite{"bounded-signs", 100, 1}, Suite{"gaussian-coords", 50, 2}}) {
    auto c = base_config("martingale-verify", std::string("martingale-") + s.generator);
    c.replicas = 10'000;
    cli::MartingaleConfig mc;
    mc.generator = s.generator;
    mc.n = s.n;
    mc.dim = s.dim;
    const double root = std::sqrt(static_cast<double>(s.n));
    cli::GridSpec g;
    g.from = 0.2 * root;
    g.to = 6.0 * root;
    g.count = 10;
    mc.x = mc.y = mc.t = g;
    c.martingale = mc;
    const json r = run(c)["results"];
    total += r["violations"].get<std::size_t>();
    for (const auto& [name, v] : r["variants"].items()) {
      if (v.contains("skipped")) continue;
      detail += std::string(detail.empty() ? "" : ", ") + s.generator + "/" + name + " " +
                std::to_string(v["violations"].get<std::size_t>()) + "/" +
                std::to_string(v["cells"].get<std::size_t>());
    }
  }
  return {total == 0, "violations " + detail};
}

Verdict check_incomplete() {
  auto c = base_config("incomplete-compare", "incomplete");
  c.replicas = 10'000;
  c.kernel.name = "product";
  cli::ScalingConfigFile sc;
  sc.n = {20, 40};
  sc.draws = {100, 1000, 10000};
  c.scaling = sc;
  const json r = run(c)["results"];
  bool coincide = !r["matching"].empty();
  double worst = 0.0;
  for (const auto& mt : r["matching"]) {
    const double a = mt["normalization_fixed"], b = mt["normalization_bernoulli"];
    worst = std::max(worst, std::abs(a / b - 1.0));
  }
  coincide = coincide && worst <= 1e-12;
  const bool unbiased = r["unbiased_all"];
  const double ratio = r["normalized_ratio"].is_null() ? INFINITY : r["normalized_ratio"].get<double>();
  return {unbiased && ratio <= 5.0 && coincide,
          std::string("unbiased ") + (unbiased ? "yes" : "no") + ", quantile ratio " +
              fmt("%.3f", ratio) + ", " + std::to_string(r["matching"].size()) +
              " matching points with normalization gap " + fmt("%.3g", worst)};
}

Verdict check_decoupling() {
  auto c = base_config("decouple-compare", "decouple");
  c.replicas = 100'000;
  c.n = 30;
  c.kernel.name = "product";
  c.x_grid = log_grid(1.0, 300.0, 40);
  const json r = run(c)["results"];
  const bool ok = r["k_defined"].get<bool>() && r["k_finite"].get<bool>() &&
                  r["domination_holds"].get<bool>() && r.contains("fitted_k");
  const std::string k = r["fitted_k"].is_null() ? "none" : fmt("%.4f", r["fitted_k"].get<double>());
  return {ok, "fitted K " + k + " over " + std::to_string(r["usable_points"].get<std::size_t>()) +
                  " usable points"};
}

Verdict check_determinism() {
  std::vector<cli::Config> configs;
  {
    auto c = base_config("estimate", "");
    c.n = 25;
    c.kernel.name = "gini";
    c.design = cli::DesignConfig{"bernoulli", 0, 0.3};
    configs.push_back(c);
  }
  {
    auto c = base_config("decompose", "");
    c.kernel.name = "gini";
    c.n = 9;
    configs.push_back(c);
  }
  {
    auto c = base_config("tailscan", "");
    c.replicas = 3000;
    c.n = 20;
    c.x_grid = log_grid(0.05, 5.0, 20);
    configs.push_back(c);
  }
  {
    auto c = base_config("incomplete-compare", "");
    c.replicas = 500;
    cli::ScalingConfigFile sc;
    sc.n = {12};
    sc.draws = {30, 100};
    c.scaling = sc;
    configs.push_back(c);
  }
  {
    auto c = base_config("decouple-compare", "");
    c.replicas = 3000;
    c.n = 15;
    c.x_grid = log_grid(1.0, 50.0, 10);
    configs.push_back(c);
  }
  {
    auto c = base_config("martingale-verify", "");
    c.replicas = 2000;
    cli::MartingaleConfig mc;
    mc.n = 30;
    mc.x.points = {2, 5, 10};
    mc.y.points = {2, 5};
    c.martingale = mc;
    configs.push_back(c);
  }
  std::size_t compared = 0;
  std::vector<std::string> mismatched;
  for (auto c : configs) {
    std::vector<json> data;
    for (int threads : {1, 4, 8}) {
      c.threads = threads;
      c.output = (scratch_root() / ("det-" + c.experiment + "-t" + std::to_string(threads))).string();
      const json manifest = run(c);
      json files = json::array();
      for (const auto& f : manifest["files"])
        if (f["name"].get<std::string>().ends_with(".csv")) files.push_back(f);
      data.push_back(files);
    }
    compared += data[0].size();
    if (data[0].empty() || data[0] != data[1] || data[0] != data[2]) mismatched.push_back(c.experiment);
  }
  std::string detail = std::to_string(compared) + " CSV files x threads {1,4,8}";
  for (const auto& e : mismatched) detail += "; mismatch in " + e;
  return {mismatched.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"hoeffding decomposition identity", check_decomposition},
      {"degeneracy detection", check_degeneracy},
      {"running-max embedding identity", check_embedding},
      {"tail-decay exponent", check_tail_exponent},
      {"martingale inequality suites", check_martingale},
      {"incomplete design unbiasedness and scaling", check_incomplete},
      {"decoupling domination", check_decoupling},
      {"determinism across thread counts", check_determinism},
  };
  std::set<int> only;
  if (argc > 1) {
    std::stringstream ss(argv[1]);
    for (std::string tok; std::getline(ss, tok, ',');) only.insert(std::stoi(tok));
  }
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %d: %s: %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", id, criteria[i].first,
                v.detail.c_str(), secs);
    std::fflush(stdout);
    failed += v.pass ? 0 : 1;
  }
  return failed;
}
