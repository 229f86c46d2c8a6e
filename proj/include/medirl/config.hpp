#pragma once

#include <cmath>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "medirl/error.hpp"
#include "medirl/grid.hpp"
#include "medirl/io.hpp"
#include "medirl/reward_net.hpp"
#include "medirl/train.hpp"

namespace medirl {

inline constexpr int kConfigVersion = 1;

struct HiddenLayer {
  std::size_t width = 64;
  Activation activation = Activation::relu;
  double alpha = 0.01;

  bool operator==(const HiddenLayer&) const = default;
};

/// Demonstrations sampled from the soft-optimal policy of the reward
/// R(s) = -reward_scale * |cell(s) - goal| (distance in cells).
struct SyntheticData {
  std::size_t count = 60;
  std::size_t horizon = 15;
  /// Goal cell; empty picks the cell at extent/2 on each planar axis and 0 on z.
  std::vector<int> goal;
  double reward_scale = 1.0;

  bool operator==(const SyntheticData&) const = default;
};

struct DataSource {
  std::string csv;                         // used when non-empty
  std::optional<SyntheticData> synthetic;  // used otherwise

  bool operator==(const DataSource&) const = default;
};

struct ExperimentConfig {
  GridSpec grid{3, {8, 8, 3}, 1.0, {0.0, 0.0, 0.0}};
  double gamma = 0.01;
  FeatureMode features = FeatureMode::coordinates;
  std::vector<HiddenLayer> hidden{{64, Activation::relu, 0.01}, {32, Activation::relu, 0.01}};
  TrainingConfig training;
  DataSource data{"", SyntheticData{}};
  double split = 0.7;
  std::string output_dir = "out";
  std::uint64_t seed = 0;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Full layer list for a given input width: hidden layers, then a linear
/// scalar head.
inline std::vector<LayerSpec> layer_specs(const ExperimentConfig& cfg, std::size_t input_width) {
  std::vector<LayerSpec> layers;
  std::size_t in = input_width;
  for (const HiddenLayer& h : cfg.hidden) {
    layers.push_back({in, h.width, h.activation, h.alpha});
    in = h.width;
  }
  layers.push_back({in, 1, Activation::linear, 0.01});
  return layers;
}

inline void validate(const ExperimentConfig& cfg) {
  try {
    validate(cfg.grid);
    if (!(cfg.gamma >= 0.0 && cfg.gamma <= 1.0)) fail(ErrorCode::invalid_gamma, "gamma must lie in [0, 1]");
    validate(cfg.training);
    const std::size_t in = cfg.features == FeatureMode::one_hot ? state_count(cfg.grid)
                                                                : 2 * static_cast<std::size_t>(cfg.grid.dims);
    validate_layers(layer_specs(cfg, in));
    if (!(cfg.split > 0.0 && cfg.split < 1.0)) fail(ErrorCode::invalid_config, "split must lie in (0, 1)");
    if (cfg.data.csv.empty()) {
      if (!cfg.data.synthetic) fail(ErrorCode::invalid_config, "data needs either csv or synthetic");
      const SyntheticData& syn = *cfg.data.synthetic;
      if (syn.count < 2) fail(ErrorCode::invalid_config, "synthetic.count must be >= 2");
      if (syn.horizon < 1) fail(ErrorCode::invalid_config, "synthetic.horizon must be >= 1");
      if (!syn.goal.empty() && static_cast<int>(syn.goal.size()) != cfg.grid.dims)
        fail(ErrorCode::invalid_config, "synthetic.goal must have one entry per grid axis");
      for (std::size_t d = 0; d < syn.goal.size(); ++d)
        if (syn.goal[d] < 0 || syn.goal[d] >= cfg.grid.extent[d])
          fail(ErrorCode::invalid_config, "synthetic.goal lies outside the grid");
      if (!std::isfinite(syn.reward_scale)) fail(ErrorCode::invalid_config, "synthetic.reward_scale must be finite");
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::invalid_config) throw;
    fail(ErrorCode::invalid_config, e.what());
  }
}

// ---------------------------------------------------------------------------
// JSON mapping

inline std::string to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::leaky_relu: return "leaky_relu";
    case Activation::linear: return "linear";
  }
  return "linear";
}

inline Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "leaky_relu") return Activation::leaky_relu;
  if (s == "linear") return Activation::linear;
  fail(ErrorCode::invalid_config, "unknown activation '" + s + "'");
}

inline std::string to_string(FeatureMode m) { return m == FeatureMode::one_hot ? "one_hot" : "coordinates"; }

inline FeatureMode feature_mode_from_string(const std::string& s) {
  if (s == "one_hot") return FeatureMode::one_hot;
  if (s == "coordinates") return FeatureMode::coordinates;
  fail(ErrorCode::invalid_config, "unknown feature mode '" + s + "'");
}

inline std::string to_string(LossKind k) { return k == LossKind::maxent ? "maxent" : "mse"; }

inline LossKind loss_from_string(const std::string& s) {
  if (s == "maxent") return LossKind::maxent;
  if (s == "mse") return LossKind::mse;
  fail(ErrorCode::invalid_config, "unknown loss '" + s + "'");
}

inline nlohmann::json to_json(const ExperimentConfig& cfg) {
  using nlohmann::json;
  json grid{{"dims", cfg.grid.dims},
            {"extent", cfg.grid.extent},
            {"cell_size", cfg.grid.cell_size},
            {"origin", std::vector<double>(cfg.grid.origin.begin(), cfg.grid.origin.begin() + cfg.grid.dims)}};
  json hidden = json::array();
  for (const HiddenLayer& h : cfg.hidden) {
    json layer{{"width", h.width}, {"activation", to_string(h.activation)}};
    if (h.activation == Activation::leaky_relu) layer["alpha"] = h.alpha;
    hidden.push_back(layer);
  }
  json training{{"lr", cfg.training.lr},
                {"epochs", cfg.training.epochs},
                {"batch_size", cfg.training.batch_size},
                {"loss", to_string(cfg.training.loss)},
                {"horizon", cfg.training.horizon},
                {"weight_decay", cfg.training.weight_decay}};
  json data = json::object();
  if (!cfg.data.csv.empty()) data["csv"] = cfg.data.csv;
  if (cfg.data.synthetic) {
    const SyntheticData& s = *cfg.data.synthetic;
    data["synthetic"] = json{{"count", s.count}, {"horizon", s.horizon}, {"goal", s.goal}, {"reward_scale", s.reward_scale}};
  }
  return json{{"medirl_config", kConfigVersion},
              {"seed", cfg.seed},
              {"grid", grid},
              {"gamma", cfg.gamma},
              {"features", to_string(cfg.features)},
              {"network", json{{"hidden", hidden}}},
              {"training", training},
              {"data", data},
              {"split", cfg.split},
              {"output_dir", cfg.output_dir}};
}

namespace detail {

inline void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) fail(ErrorCode::invalid_config, where + " must be an object");
  std::set<std::string> keys(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!keys.count(it.key())) fail(ErrorCode::invalid_config, "unknown key '" + it.key() + "' in " + where);
}

template <class T>
void read_opt(const nlohmann::json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

}  // namespace detail

/// Missing keys keep their defaults; unknown keys are rejected.
inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  try {
    detail::reject_unknown(j, {"medirl_config", "seed", "grid", "gamma", "features", "network", "training", "data",
                               "split", "output_dir"},
                           "config");
    if (!j.contains("medirl_config")) fail(ErrorCode::invalid_config, "missing version key 'medirl_config'");
    const int version = j.at("medirl_config").get<int>();
    if (version != kConfigVersion)
      fail(ErrorCode::invalid_config, "unsupported config version " + std::to_string(version));
    detail::read_opt(j, "seed", cfg.seed);
    detail::read_opt(j, "gamma", cfg.gamma);
    detail::read_opt(j, "split", cfg.split);
    detail::read_opt(j, "output_dir", cfg.output_dir);
    if (j.contains("features")) cfg.features = feature_mode_from_string(j.at("features").get<std::string>());

    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      detail::reject_unknown(g, {"dims", "extent", "cell_size", "origin"}, "grid");
      detail::read_opt(g, "dims", cfg.grid.dims);
      detail::read_opt(g, "extent", cfg.grid.extent);
      detail::read_opt(g, "cell_size", cfg.grid.cell_size);
      cfg.grid.origin = {0.0, 0.0, 0.0};
      if (g.contains("origin")) {
        const auto origin = g.at("origin").get<std::vector<double>>();
        if (origin.size() > 3) fail(ErrorCode::invalid_config, "grid.origin has too many entries");
        for (std::size_t d = 0; d < origin.size(); ++d) cfg.grid.origin[d] = origin[d];
      }
    }
    if (j.contains("network")) {
      const auto& n = j.at("network");
      detail::reject_unknown(n, {"hidden"}, "network");
      if (n.contains("hidden")) {
        cfg.hidden.clear();
        for (const auto& h : n.at("hidden")) {
          detail::reject_unknown(h, {"width", "activation", "alpha"}, "network.hidden[]");
          HiddenLayer layer;
          detail::read_opt(h, "width", layer.width);
          if (h.contains("activation")) layer.activation = activation_from_string(h.at("activation").get<std::string>());
          detail::read_opt(h, "alpha", layer.alpha);
          cfg.hidden.push_back(layer);
        }
      }
    }
    if (j.contains("training")) {
      const auto& t = j.at("training");
      detail::reject_unknown(t, {"lr", "epochs", "batch_size", "loss", "horizon", "weight_decay"}, "training");
      detail::read_opt(t, "lr", cfg.training.lr);
      detail::read_opt(t, "epochs", cfg.training.epochs);
      detail::read_opt(t, "batch_size", cfg.training.batch_size);
      detail::read_opt(t, "horizon", cfg.training.horizon);
      detail::read_opt(t, "weight_decay", cfg.training.weight_decay);
      if (t.contains("loss")) cfg.training.loss = loss_from_string(t.at("loss").get<std::string>());
    }
    if (j.contains("data")) {
      const auto& d = j.at("data");
      detail::reject_unknown(d, {"csv", "synthetic"}, "data");
      cfg.data = DataSource{};
      detail::read_opt(d, "csv", cfg.data.csv);
      if (d.contains("synthetic")) {
        const auto& s = d.at("synthetic");
        detail::reject_unknown(s, {"count", "horizon", "goal", "reward_scale"}, "data.synthetic");
        SyntheticData syn;
        detail::read_opt(s, "count", syn.count);
        detail::read_opt(s, "horizon", syn.horizon);
        detail::read_opt(s, "goal", syn.goal);
        detail::read_opt(s, "reward_scale", syn.reward_scale);
        cfg.data.synthetic = syn;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::invalid_config, e.what());
  }
  cfg.training.seed = cfg.seed;
  validate(cfg);
  return cfg;
}

inline ExperimentConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::invalid_config, std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

inline std::string serialize_config(const ExperimentConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

inline ExperimentConfig load_config(const std::filesystem::path& path) { return parse_config(read_text_file(path)); }

inline void save_config(const ExperimentConfig& cfg, const std::filesystem::path& path) {
  write_text_file(path, serialize_config(cfg));
}

}  // namespace medirl
