#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "medirl/config.hpp"
#include "medirl/error.hpp"
#include "medirl/grid.hpp"
#include "medirl/io.hpp"
#include "medirl/prediction.hpp"
#include "medirl/random.hpp"
#include "medirl/reward_net.hpp"
#include "medirl/train.hpp"
#include "medirl/trajectory.hpp"

namespace medirl {

inline GridMDP make_mdp(const ExperimentConfig& cfg) { return GridMDP(cfg.grid, cfg.gamma); }

inline RewardNetwork make_network(const ExperimentConfig& cfg, const GridMDP& mdp) {
  return init_network(layer_specs(cfg, feature_dim(mdp, cfg.features)), derive_seed(cfg.seed, SeedStream::network_init));
}

/// Hand-designed reward used for synthetic demonstrations.
inline std::vector<double> synthetic_reward(const GridMDP& mdp, const SyntheticData& syn) {
  Cell goal{0, 0, 0};
  for (int d = 0; d < mdp.dims(); ++d) {
    if (!syn.goal.empty()) goal[d] = syn.goal[d];
    else goal[d] = d < 2 ? mdp.spec().extent[d] / 2 : 0;
  }
  std::vector<double> r(mdp.num_states());
  for (std::size_t s = 0; s < r.size(); ++s) {
    const Cell c = mdp.cell_of(s);
    double sq = 0.0;
    for (int d = 0; d < mdp.dims(); ++d) sq += static_cast<double>((c[d] - goal[d]) * (c[d] - goal[d]));
    r[s] = -syn.reward_scale * std::sqrt(sq);
  }
  return r;
}

/// The configured data set: loaded from CSV, or sampled on the config's
/// grid with the synthetic-data seed stream.
inline std::vector<Trajectory> resolve_data(const ExperimentConfig& cfg) {
  if (!cfg.data.csv.empty()) {
    if (!std::filesystem::exists(cfg.data.csv)) fail(ErrorCode::io_error, "data file not found: " + cfg.data.csv);
    return load_trajectories(cfg.data.csv, cfg.grid);
  }
  if (!cfg.data.synthetic) fail(ErrorCode::invalid_config, "no data source configured");
  const GridMDP mdp = make_mdp(cfg);
  const SyntheticData& syn = *cfg.data.synthetic;
  return generate_synthetic(mdp, synthetic_reward(mdp, syn), syn.count, syn.horizon,
                            derive_seed(cfg.seed, SeedStream::synthetic_data));
}

struct DataSplit {
  std::vector<Trajectory> train;
  std::vector<Trajectory> test;
};

/// Seeded shuffle, then the first round(fraction * N) trajectories train
/// (at least one on each side). Both halves come back sorted by id.
inline DataSplit split_data(std::vector<Trajectory> trajs, double fraction, std::uint64_t seed) {
  if (trajs.size() < 2) fail(ErrorCode::invalid_config, "need at least two trajectories to split");
  Rng rng(derive_seed(seed, SeedStream::data_split));
  for (std::size_t i = trajs.size(); i-- > 1;) std::swap(trajs[i], trajs[rng.below(i + 1)]);
  auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(trajs.size())));
  n_train = std::clamp<std::size_t>(n_train, 1, trajs.size() - 1);
  DataSplit out;
  out.train.assign(trajs.begin(), trajs.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.test.assign(trajs.begin() + static_cast<std::ptrdiff_t>(n_train), trajs.end());
  auto by_id = [](const Trajectory& a, const Trajectory& b) { return a.id < b.id; };
  std::sort(out.train.begin(), out.train.end(), by_id);
  std::sort(out.test.begin(), out.test.end(), by_id);
  return out;
}

struct TrainedModel {
  RewardNetwork net;
  TrainResult result;
};

inline TrainedModel train_experiment(const ExperimentConfig& cfg, const std::vector<Trajectory>& train_set,
                                     const std::function<void(const EpochRecord&)>& on_epoch = {}) {
  validate(cfg);
  const GridMDP mdp = make_mdp(cfg);
  TrainedModel model{make_network(cfg, mdp), {}};
  const std::vector<Demo> demos = to_demos(mdp, train_set);
  TrainingConfig tc = cfg.training;
  tc.seed = cfg.seed;
  model.result = train(mdp, model.net, demos, cfg.features, tc, on_epoch);
  return model;
}

inline EvaluationReport evaluate_experiment(const ExperimentConfig& cfg, const RewardNetwork& net,
                                            const std::vector<Trajectory>& test_set) {
  const GridMDP mdp = make_mdp(cfg);
  if (net.input_width() != feature_dim(mdp, cfg.features))
    fail(ErrorCode::dimension_mismatch, "model input width does not match the configured features");
  return evaluate(mdp, net, cfg.features, test_set);
}

// Output files ---------------------------------------------------------------

/// loss.csv: `epoch,loss`, one row per epoch.
inline std::string format_loss_csv(const TrainResult& result) {
  std::ostringstream out;
  out << "epoch,loss\n";
  for (const EpochRecord& e : result.epochs) out << e.epoch << ',' << format_double(e.loss) << '\n';
  return out.str();
}

/// timing.csv: `epoch,wall_ms`. Kept apart from loss.csv so that file
/// stays byte-reproducible.
inline std::string format_timing_csv(const TrainResult& result) {
  std::ostringstream out;
  out << "epoch,wall_ms\n";
  for (const EpochRecord& e : result.epochs) out << e.epoch << ',' << format_double(e.wall_ms) << '\n';
  return out.str();
}

/// metrics.csv: `id,ade,fde,nde,nde_defined` (nde empty when undefined).
inline std::string format_metrics_csv(const EvaluationReport& rep) {
  std::ostringstream out;
  out << "id,ade,fde,nde,nde_defined\n";
  for (const TrajectoryResult& r : rep.rows) {
    out << r.id << ',' << format_double(r.metrics.ade) << ',' << format_double(r.metrics.fde) << ',';
    if (r.metrics.nde_defined) out << format_double(r.metrics.nde);
    out << ',' << (r.metrics.nde_defined ? 1 : 0) << '\n';
  }
  return out.str();
}

/// metrics.json: {mean_ade, mean_fde, mean_nde, n, n_nde}; mean_nde is
/// null when no trajectory had a non-linear point.
inline nlohmann::json metrics_json(const EvaluationReport& rep) {
  nlohmann::json j{{"mean_ade", rep.mean_ade}, {"mean_fde", rep.mean_fde}, {"n", rep.n}, {"n_nde", rep.n_nde}};
  j["mean_nde"] = rep.n_nde > 0 ? nlohmann::json(rep.mean_nde) : nlohmann::json(nullptr);
  return j;
}

}  // namespace medirl
