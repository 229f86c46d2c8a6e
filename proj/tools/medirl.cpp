#include <iostream>

#include <CLI11.hpp>

#include "medirl/commands.hpp"

namespace {

void add_common(CLI::App* cmd, medirl::cli::CommonOptions& opts) {
  cmd->add_option("-c,--config", opts.config_path, "Experiment config file (JSON)");
  cmd->add_option("--seed", opts.seed, "Override the experiment seed");
  cmd->add_option("--epochs", opts.epochs, "Override training epochs");
  cmd->add_option("--output-dir", opts.output_dir, "Override the output directory");
  cmd->add_option("--data", opts.data_csv, "Use this trajectory CSV instead of the configured data");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace medirl::cli;
  CLI::App app{"MaxEnt deep IRL on gridworld pedestrian MDPs"};
  app.require_subcommand(1);

  GenDataOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Write synthetic demonstrations as trajectory CSV");
  add_common(gen_cmd, gen.common);
  gen_cmd->add_option("--count", gen.count, "Number of trajectories");
  gen_cmd->add_option("--horizon", gen.horizon, "Steps per trajectory (points = horizon + 1)");
  gen_cmd->add_option("--out", gen.out, "Output CSV path")->required();

  CommonOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train a reward network, writing model.bin and loss.csv");
  add_common(train_cmd, train);

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score greedy rollouts against held-out trajectories");
  add_common(eval_cmd, eval.common);
  eval_cmd->add_option("--model", eval.model, "Model file (default <output_dir>/model.bin)");
  eval_cmd->add_option("--test", eval.test, "Test trajectory CSV (default: held-out split)");

  AblateOptions ablate;
  auto* ablate_cmd = app.add_subcommand("ablate", "Run the ablation suite and print the comparison table");
  add_common(ablate_cmd, ablate.common);
  ablate_cmd->add_option("--variants", ablate.variants,
                         "all, or comma-separated from Original,NoHiddenLayer,TwoDState,NoDiscount,LeakyRelu,MseLoss");
  ablate_cmd->add_option("--alpha", ablate.alpha, "Negative slope for the LeakyRelu variant");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageFailure;
  }

  if (*gen_cmd) return cmd_gen_data(gen, std::cout, std::cerr);
  if (*train_cmd) return cmd_train(train, std::cout, std::cerr);
  if (*eval_cmd) return cmd_eval(eval, std::cout, std::cerr);
  if (*ablate_cmd) return cmd_ablate(ablate, std::cout, std::cerr);
  return kUsageFailure;
}
