#pragma once

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "medirl/ablate.hpp"
#include "medirl/config.hpp"
#include "medirl/error.hpp"
#include "medirl/experiment.hpp"
#include "medirl/io.hpp"

namespace medirl::cli {

/// 0 success, 1 runtime failure, 2 usage / config / IO failure.
enum ExitCode : int { kOk = 0, kRuntimeFailure = 1, kUsageFailure = 2 };

inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::training_aborted:
    case ErrorCode::non_finite_gradient:
    case ErrorCode::non_finite_rewards:
    case ErrorCode::non_finite_input:
    case ErrorCode::no_retained_forward:
      return kRuntimeFailure;
    default:
      return kUsageFailure;
  }
}

/// Flags shared by every command; each one set overrides the config file.
struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  std::optional<std::string> output_dir;
  std::optional<std::string> data_csv;
};

inline ExperimentConfig resolve_config(const CommonOptions& opts) {
  ExperimentConfig cfg = opts.config_path.empty() ? ExperimentConfig{} : load_config(opts.config_path);
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.epochs) cfg.training.epochs = *opts.epochs;
  if (opts.output_dir) cfg.output_dir = *opts.output_dir;
  if (opts.data_csv) cfg.data.csv = *opts.data_csv;
  cfg.training.seed = cfg.seed;
  validate(cfg);
  return cfg;
}

template <class Fn>
int guarded(std::ostream& err, Fn&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
}

struct GenDataOptions {
  CommonOptions common;
  std::optional<std::size_t> count;
  std::optional<std::size_t> horizon;
  std::string out;
};

inline int cmd_gen_data(const GenDataOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig base = resolve_config(opts.common);
    ExperimentConfig cfg = base;
    SyntheticData syn = base.data.synthetic.value_or(SyntheticData{});
    if (opts.count) syn.count = *opts.count;
    if (opts.horizon) syn.horizon = *opts.horizon;
    cfg.data = DataSource{"", syn};
    validate(cfg);
    if (opts.out.empty()) fail(ErrorCode::invalid_config, "--out is required");
    const auto trajs = resolve_data(cfg);
    write_trajectories(opts.out, trajs);
    out << "wrote " << trajs.size() << " trajectories (horizon " << syn.horizon << ", seed " << cfg.seed << ") to "
        << opts.out << '\n';
    return int{kOk};
  });
}

inline int cmd_train(const CommonOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig cfg = resolve_config(opts);
    const std::filesystem::path dir = cfg.output_dir;
    const DataSplit split = split_data(resolve_data(cfg), cfg.split, cfg.seed);
    ensure_directory(dir);
    const TrainedModel model = train_experiment(cfg, split.train, [&](const EpochRecord& e) {
      out << "epoch " << e.epoch << '/' << cfg.training.epochs << " loss=" << format_double(e.loss) << '\n';
    });
    save_model(model.net, (dir / "model.bin").string());
    write_text_file(dir / "loss.csv", format_loss_csv(model.result));
    write_text_file(dir / "timing.csv", format_timing_csv(model.result));
    save_config(cfg, dir / "config.json");
    out << "model written to " << (dir / "model.bin").string() << '\n';
    return int{kOk};
  });
}

struct EvalOptions {
  CommonOptions common;
  std::string model;  // default <output_dir>/model.bin
  std::string test;   // default: held-out split of the configured data
};

inline int cmd_eval(const EvalOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig cfg = resolve_config(opts.common);
    const std::filesystem::path dir = cfg.output_dir;
    const std::string model_path = opts.model.empty() ? (dir / "model.bin").string() : opts.model;
    const RewardNetwork net = load_model(model_path);
    std::vector<Trajectory> test_set;
    if (!opts.test.empty()) test_set = load_trajectories(opts.test, cfg.grid);
    else test_set = split_data(resolve_data(cfg), cfg.split, cfg.seed).test;
    const EvaluationReport rep = evaluate_experiment(cfg, net, test_set);
    ensure_directory(dir);
    write_text_file(dir / "metrics.csv", format_metrics_csv(rep));
    write_text_file(dir / "metrics.json", metrics_json(rep).dump(2) + "\n");
    out << "n=" << rep.n << " mean_ade=" << format_double(rep.mean_ade) << " mean_fde=" << format_double(rep.mean_fde)
        << " mean_nde=" << (rep.n_nde > 0 ? format_double(rep.mean_nde) : std::string("undefined")) << '\n';
    return int{kOk};
  });
}

struct AblateOptions {
  CommonOptions common;
  std::string variants = "all";  // "all" or comma-separated names
  double alpha = 0.01;
};

inline std::vector<AblationVariant> parse_variants(const std::string& spec, double alpha) {
  std::vector<AblationVariant> out;
  if (spec == "all") {
    for (VariantKind k : kAllVariants) out.push_back({k, alpha});
    return out;
  }
  std::stringstream ss(spec);
  std::string name;
  while (std::getline(ss, name, ','))
    if (!name.empty()) out.push_back({variant_from_name(name), alpha});
  if (out.empty()) fail(ErrorCode::invalid_config, "no variants given");
  return out;
}

inline int cmd_ablate(const AblateOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig cfg = resolve_config(opts.common);
    const auto variants = parse_variants(opts.variants, opts.alpha);
    const AblationReport rep =
        run_suite(cfg, variants, cfg.output_dir, [&](const std::string& line) { err << line << '\n'; });
    out << format_report_table(rep);
    out << "report written to " << (std::filesystem::path(cfg.output_dir) / "report.json").string() << '\n';
    return int{kOk};
  });
}

}  // namespace medirl::cli
