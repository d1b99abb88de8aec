#include "mazya/app/commands.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

namespace {

int env_threads() {
  const char* v = std::getenv("MAZYALAB_THREADS");
  if (!v || !*v) return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1) {
    std::cerr << "mazyalab: ignoring invalid MAZYALAB_THREADS='" << v << "'\n";
    return 1;
  }
  return static_cast<int>(n);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mazyalab: numerical checks of Maz'ya Phi-inequalities"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  int threads = 0;
  bool force = false;
  std::string input;

  auto common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", config, "configuration file")->check(CLI::ExistingFile);
    if (needs_config) c->required();
    sub->add_option("--out", out, "output directory");
    sub->add_option("--seed", seed, "override every seed in the configuration");
    sub->add_option("--threads", threads, "worker threads (default: MAZYALAB_THREADS or 1)")->check(CLI::PositiveNumber);
  };

  auto* cancel = app.add_subcommand("check-cancellation", "sphere integrals of Phi(K~) and Phi(-K~)");
  common(cancel, true);
  auto* conv = app.add_subcommand("convolve", "convolve a stored grid function with the configured bands");
  common(conv, true);
  conv->add_option("--input", input, "grid function file")->required();
  auto* verify = app.add_subcommand("verify", "run the configured suite and write report.csv");
  common(verify, true);
  auto* probe = app.add_subcommand("probe-necessity", "main ratio for dipoles of shrinking width");
  common(probe, true);
  auto* ext = app.add_subcommand("extremize", "search for large main ratios over a bump family");
  common(ext, true);
  ext->add_flag("--force", force, "search even when Phi does not cancel");
  auto* plot = app.add_subcommand("plot", "SVG charts from a report CSV");
  common(plot, false);
  plot->add_option("--input", input, "report CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mazya::app::exit_error;
  }

  try {
    mazya::app::CommandOptions opts;
    opts.out = out.empty() ? std::string(".") : out;
    opts.threads = threads > 0 ? threads : env_threads();
    opts.force = force;
    opts.log = &std::cout;
    if (!input.empty()) opts.input = input;

    if (plot->parsed()) return mazya::app::run_plot(opts);

    mazya::app::RunConfig cfg = mazya::app::load_config(config);
    if (app.get_subcommands().front()->count("--seed") > 0) mazya::app::apply_seed(cfg, seed);
    if (out.empty()) opts.out = cfg.output_dir;
    if (cancel->parsed()) return mazya::app::run_check_cancellation(cfg, opts);
    if (conv->parsed()) return mazya::app::run_convolve(cfg, opts);
    if (verify->parsed()) return mazya::app::run_verify(cfg, opts);
    if (probe->parsed()) return mazya::app::run_probe(cfg, opts);
    if (ext->parsed()) return mazya::app::run_extremize(cfg, opts);
  } catch (const std::exception& e) {
    std::cerr << "mazyalab: " << e.what() << "\n";
    return mazya::app::exit_error;
  }
  return mazya::app::exit_error;
}
