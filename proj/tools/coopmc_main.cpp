#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "coopmc/runner.hpp"
#include "coopmc/version.hpp"

namespace {

struct CliState {
  std::string config_path;
  std::string out_dir = ".";
  int threads = 0;
  std::optional<long long> trials;
  std::optional<unsigned long long> seed;
  bool force_exact = false;
  bool force_mc = false;
};

int load_and_run(const CliState& state,
                 std::string (*runner)(const coopmc::ExperimentConfig&,
                                       const coopmc::RunnerOptions&)) {
  auto result = coopmc::load_config_file(state.config_path);
  for (const auto& d : result.diagnostics)
    std::fprintf(stderr, "%s:%d: %s: %s\n", state.config_path.c_str(), d.line,
                 d.error ? "error" : "warning", d.message.c_str());
  if (!result.ok()) return 1;

  coopmc::ExperimentConfig cfg = *result.config;
  if (state.trials) cfg.sim.trials = *state.trials;
  if (state.seed) {
    cfg.sim.rng_seed = *state.seed;
    cfg.run.mc_seed = *state.seed;
  }
  if (state.force_exact) cfg.run.monte_carlo = false;
  if (state.force_mc) cfg.run.monte_carlo = true;

  const std::string path = runner(cfg, {state.out_dir, state.threads});
  std::printf("%s\n", path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative molecular-communication error toolkit"};
  app.set_version_flag("--version", std::string("coopmc ") + coopmc::kVersion);
  app.require_subcommand(1);

  CliState state;
  std::string preset;

  const auto add_common = [&](CLI::App* cmd, bool needs_config) {
    if (needs_config)
      cmd->add_option("--config", state.config_path, "experiment config file")->required();
    cmd->add_option("--out", state.out_dir, "output directory");
    cmd->add_option("--threads", state.threads, "worker threads (0 = hardware)");
    cmd->add_option("--seed", state.seed, "override RNG seed");
    cmd->add_option("--trials", state.trials, "override simulation trials");
    auto* exact = cmd->add_flag("--exact", state.force_exact, "force exact sequence averaging");
    cmd->add_flag("--mc", state.force_mc, "force Monte Carlo sequence averaging")
        ->excludes(exact);
  };

  auto* analytic = app.add_subcommand("analytic", "closed-form error probabilities");
  add_common(analytic, true);
  auto* simulate = app.add_subcommand("simulate", "particle-based Monte Carlo estimate");
  add_common(simulate, true);
  auto* optimize = app.add_subcommand("optimize", "joint threshold optimization");
  add_common(optimize, true);
  auto* sweep = app.add_subcommand("sweep", "vary one parameter over a range");
  add_common(sweep, true);
  auto* reproduce = app.add_subcommand("reproduce", "preset experiment reproductions");
  reproduce->add_option("preset", preset, "fig2 | fig3 | fig4")->required();
  add_common(reproduce, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (analytic->parsed()) return load_and_run(state, &coopmc::run_analytic);
    if (simulate->parsed()) return load_and_run(state, &coopmc::run_simulate);
    if (optimize->parsed()) return load_and_run(state, &coopmc::run_optimize);
    if (sweep->parsed()) return load_and_run(state, &coopmc::run_sweep);
    if (reproduce->parsed()) {
      std::optional<std::uint64_t> seed;
      if (state.seed) seed = *state.seed;
      const std::string path =
          coopmc::run_reproduce(preset, {state.out_dir, state.threads}, state.trials, seed);
      std::printf("%s\n", path.c_str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
