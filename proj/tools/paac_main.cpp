#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "paac/cli.hpp"
#include "paac/config.hpp"

namespace {

paac::RunConfig load_run_config(const std::string& config_path,
                                const std::vector<std::string>& overrides) {
  paac::RunConfig cfg;
  if (!config_path.empty()) cfg = paac::parse_config_file(config_path);
  for (const std::string& assignment : overrides) {
    paac::apply_override(cfg, assignment);
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phased actor-critic reinforcement learning toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("-c,--config", config_path, "Run configuration file (key = value lines)")
      ->envname("PAAC_CONFIG");
  app.add_option("-s,--set", overrides,
                 "Override a config key, e.g. --set total_steps=1000 (repeatable)");

  auto* train = app.add_subcommand("train", "Train variants and write CSV results");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpointed policy");
  std::string eval_checkpoint;
  eval->add_option("--checkpoint", eval_checkpoint, "Agent checkpoint file")->required();

  auto* probe = app.add_subcommand("probe-variance",
                                   "Gradient-variance probe on an agent checkpoint");
  std::string probe_checkpoint;
  std::size_t probe_batch_size = 1;
  std::size_t probe_n_batches = 10000;
  probe->add_option("--checkpoint", probe_checkpoint, "Agent checkpoint file")->required();
  probe->add_option("--batch-size", probe_batch_size, "Minibatch size per draw");
  probe->add_option("--n-batches", probe_n_batches, "Number of minibatch draws");

  auto* riccati = app.add_subcommand("riccati", "Solve the discounted Riccati equation");

  auto* check = app.add_subcommand("check", "Run the property suites");
  std::string suites_csv = "gradient,theorem1,schedule,value_iteration";
  check->add_option("--suites", suites_csv,
                    "Comma-separated suite list (empty string runs none)");

  auto* sweep =
      app.add_subcommand("sweep", "Run a phased variant across all transition functions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return paac::exit_config_error;
  }

  return paac::run_guarded([&]() -> int {
    paac::RunConfig cfg = load_run_config(config_path, overrides);
    if (train->parsed()) return paac::cmd_train(cfg);
    if (eval->parsed()) return paac::cmd_eval(eval_checkpoint, cfg);
    if (probe->parsed()) {
      return paac::cmd_probe_variance(probe_checkpoint, cfg, probe_batch_size,
                                      probe_n_batches);
    }
    if (riccati->parsed()) return paac::cmd_riccati(cfg);
    if (check->parsed()) {
      std::vector<std::string> suites = paac::detail::split_commas(suites_csv);
      return paac::cmd_check(suites);
    }
    if (sweep->parsed()) return paac::cmd_sweep(cfg);
    return paac::exit_config_error;
  });
}
