#include <iostream>

#include "CLI11.hpp"
#include "runner.hpp"

int main(int argc, char** argv) {
  using ustat::cli::RunOptions;
  RunOptions opts;
  CLI::App app{"ustatlab: Hilbert-space U-statistics and Monte Carlo tail experiments"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config, out;
  std::uint64_t seed = 0;
  int threads = 0;
  auto* config_opt = app.add_option("--config", config, "Experiment config (YAML)")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "Master seed");
  auto* threads_opt = app.add_option("--threads", threads, "Worker threads (0 = USTATLAB_THREADS or all cores)")
                          ->check(CLI::NonNegativeNumber);
  auto* out_opt = app.add_option("--out", out, "Output directory");

  auto* estimate = app.add_subcommand("estimate", "Complete, incomplete or weighted U-statistic");
  std::string kernel, design, weights, sample;
  int m = 0;
  std::size_t n = 0;
  auto* kernel_opt = estimate->add_option("--kernel", kernel, "gini | spatial-sign | product | identity | zero | empirical-indicator");
  auto* m_opt = estimate->add_option("--m", m, "Kernel arity (sets it for the zero kernel, checked otherwise)");
  auto* n_opt = estimate->add_option("--n", n, "Sample size drawn from the configured law");
  auto* design_opt = estimate->add_option("--design", design, "with-replacement:N | without-replacement:N | bernoulli:p");
  auto* weights_opt = estimate->add_option("--weights-file", weights, "CSV of i_1,...,i_m,weight")->check(CLI::ExistingFile);
  auto* sample_opt = estimate->add_option("--sample", sample, "Explicit sample, e.g. 1,-1,2 or 1,0;0,1");
  design_opt->excludes(weights_opt);

  app.add_subcommand("decompose", "Hoeffding projection residuals per order");
  app.add_subcommand("tailscan", "Tail probabilities and decay exponent fit");
  app.add_subcommand("incomplete-compare", "Incomplete U-statistic scaling across designs");
  app.add_subcommand("decouple-compare", "Complete vs decoupled tail domination");
  auto* mart = app.add_subcommand("martingale-verify", "Martingale inequality grid checks");
  std::string variant, grid_file;
  auto* variant_opt = mart->add_option("--variant", variant, "real | A2 | A3 | conv")
                          ->check(CLI::IsMember({"real", "A2", "A3", "conv"}));
  auto* grid_opt = mart->add_option("--grid-file", grid_file, "YAML with x, y, t grids")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ustat::cli::kExitUsage;
  }

  opts.subcommand = app.get_subcommands().front()->get_name();
  if (*config_opt) opts.config_path = config;
  if (*seed_opt) opts.seed = seed;
  if (*threads_opt) opts.threads = threads;
  if (*out_opt) opts.out = out;
  if (*kernel_opt) opts.kernel = kernel;
  if (*m_opt) opts.m = m;
  if (*n_opt) opts.n = n;
  if (*design_opt) opts.design = design;
  if (*weights_opt) opts.weights_file = weights;
  if (*sample_opt) opts.sample = sample;
  if (*variant_opt) opts.variant = variant;
  if (*grid_opt) opts.grid_file = grid_file;
  return ustat::cli::run(opts, std::cout, std::cerr);
}
