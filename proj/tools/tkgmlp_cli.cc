// tkgmlp: synth | fit | evaluate | grid | encode
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "tkgmlp/commands.h"
#include "tkgmlp/error.h"
#include "tkgmlp/run_config.h"

namespace {

struct GlobalOptions {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
};

void add_config_options(CLI::App* cmd, GlobalOptions& g) {
  cmd->add_option("-c,--config", g.config, "JSON run config");
  cmd->add_option("--set", g.overrides, "Override one key, e.g. --set train.max_epochs=5");
  cmd->add_option("--seed", g.seed, "Run seed (overrides the config)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TKGMLP tabular classifier: KAN layers, gMLP blocks and quantile encodings"};
  app.require_subcommand(1);

  GlobalOptions g;
  std::string checkpoint;
  std::string data;
  std::string split = "valid";

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset with oracle probabilities");
  auto* fit = app.add_subcommand("fit", "Fit encoder and model, write checkpoint and epoch log");
  auto* evaluate = app.add_subcommand("evaluate", "Score data with a checkpoint (KS, AUC in %)");
  auto* grid = app.add_subcommand("grid", "Grid search over the config's grid section");
  auto* encode = app.add_subcommand("encode", "Write encoded feature tables");
  for (auto* cmd : {synth, fit, evaluate, grid, encode}) add_config_options(cmd, g);
  evaluate->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  evaluate->add_option("--data", data, "CSV to score (schema from the checkpoint)");
  evaluate->add_option("--split", split, "train | valid | test of the config data")
      ->check(CLI::IsMember({"train", "valid", "test"}));
  encode->add_option("--checkpoint", checkpoint, "Use this checkpoint's encoder");
  encode->add_option("--data", data, "CSV to encode");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  const tkgmlp::Logger log{&std::cerr, tkgmlp::log_level_from_env()};
  try {
    const tkgmlp::RunConfig cfg = tkgmlp::load_run_config(g.config, g.overrides, g.seed);
    if (synth->parsed()) {
      tkgmlp::cmd_synth(cfg, std::cout, log);
    } else if (fit->parsed()) {
      tkgmlp::cmd_fit(cfg, std::cout, log);
    } else if (evaluate->parsed()) {
      const bool have_config = !g.config.empty() || !g.overrides.empty();
      tkgmlp::cmd_evaluate(checkpoint, data, have_config ? &cfg : nullptr, split, std::cout, log);
    } else if (grid->parsed()) {
      tkgmlp::cmd_grid(cfg, std::cout, log);
    } else if (encode->parsed()) {
      tkgmlp::cmd_encode(cfg, checkpoint, data, std::cout, log);
    }
  } catch (const tkgmlp::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
