#pragma once

#include <chrono>
#include <cstdio>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "medirl/error.hpp"
#include "medirl/grid.hpp"
#include "medirl/maxent.hpp"
#include "medirl/random.hpp"
#include "medirl/reward_net.hpp"

namespace medirl {

enum class LossKind { maxent, mse };

struct TrainingConfig {
  double lr = 0.001;
  int epochs = 3;
  /// Demos per Adam step; 0 means the whole set in one step.
  std::size_t batch_size = 32;
  LossKind loss = LossKind::maxent;
  /// 0 derives T from the longest demo.
  std::size_t horizon = 0;
  double weight_decay = 1e-4;
  std::uint64_t seed = 0;

  bool operator==(const TrainingConfig&) const = default;
};

inline void validate(const TrainingConfig& cfg) {
  if (cfg.epochs < 1) fail(ErrorCode::invalid_config, "epochs must be >= 1, got " + std::to_string(cfg.epochs));
  if (!(cfg.lr > 0.0) || !std::isfinite(cfg.lr)) fail(ErrorCode::invalid_config, "lr must be positive");
  if (!(cfg.weight_decay >= 0.0) || !std::isfinite(cfg.weight_decay))
    fail(ErrorCode::invalid_config, "weight_decay must be >= 0");
}

struct EpochRecord {
  std::size_t epoch = 0;          // 1-based
  double loss = 0.0;              // NLL (maxent) or MSE (mse), before the epoch's updates
  double demo_nll = 0.0;          // mean negative demo log-likelihood, both modes
  double policy_row_error = 0.0;  // max |sum_a pi - 1| seen this epoch
  double svf_mass_error = 0.0;    // max |sum mu - (T+1)| seen this epoch
  double wall_ms = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> epochs;
  std::size_t horizon = 0;

  std::vector<double> losses() const {
    std::vector<double> out;
    for (const EpochRecord& e : epochs) out.push_back(e.loss);
    return out;
  }
};

/// Rewards of every state conditioned on one goal, with retained tapes.
inline std::vector<double> state_rewards(const GridMDP& mdp, const RewardNetwork& net, std::size_t goal,
                                         FeatureMode mode, std::vector<ForwardTape>* tapes = nullptr) {
  const std::size_t n = mdp.num_states();
  const std::size_t dim = feature_dim(mdp, mode);
  const std::vector<double> phi = feature_matrix(mdp, goal, mode);
  std::vector<double> rewards(n);
  if (tapes) tapes->resize(n);
  for (std::size_t s = 0; s < n; ++s) {
    std::span<const double> row(phi.data() + s * dim, dim);
    rewards[s] = tapes ? net.forward(row, (*tapes)[s]) : net.forward(row);
  }
  return rewards;
}

/// Pads every demo to the common horizon (T derived from the longest demo
/// unless `horizon` is non-zero).
inline std::vector<Demo> prepare_demos(const GridMDP& mdp, std::span<const Demo> demos, std::size_t horizon,
                                       std::size_t* resolved = nullptr) {
  if (demos.empty()) fail(ErrorCode::empty_demo_set, "no demonstrations");
  std::size_t T = horizon;
  if (T == 0)
    for (const Demo& d : demos) T = std::max(T, d.horizon());
  if (T < 1) fail(ErrorCode::invalid_config, "horizon must be >= 1");
  std::vector<Demo> out;
  out.reserve(demos.size());
  for (const Demo& d : demos) out.push_back(pad_demo(mdp, d, T + 1));
  if (resolved) *resolved = T;
  return out;
}

namespace detail {

struct BatchStats {
  double objective = 0.0;  // weighted by group share of the batch
  double nll = 0.0;        // summed over demos
  double row_error = 0.0;
  double mass_error = 0.0;
};

/// One gradient evaluation over a batch. Demos sharing a goal share one
/// reward map, so they are processed as a group with p0 = their start
/// distribution. Accumulates dL/dtheta (without weight decay) into grad.
inline BatchStats batch_gradient(const GridMDP& mdp, const RewardNetwork& net, std::span<const Demo> all,
                                 std::span<const std::size_t> batch, FeatureMode mode, LossKind loss,
                                 std::size_t horizon, std::span<double> grad) {
  const std::size_t n = mdp.num_states();
  std::map<std::size_t, std::vector<std::size_t>> by_goal;
  for (std::size_t idx : batch) by_goal[all[idx].goal()].push_back(idx);

  BatchStats stats;
  std::vector<ForwardTape> tapes;
  const double batch_size = static_cast<double>(batch.size());
  for (const auto& [goal, members] : by_goal) {
    const std::vector<double> rewards = state_rewards(mdp, net, goal, mode, &tapes);
    const SoftPolicy policy = soft_value_iteration(mdp, rewards, horizon);
    stats.row_error = std::max(stats.row_error, policy.max_row_error());

    std::vector<Demo> group;
    std::vector<std::vector<std::size_t>> paths;
    std::vector<double> p0(n, 0.0);
    for (std::size_t idx : members) {
      group.push_back(all[idx]);
      paths.push_back(all[idx].states);
      p0[all[idx].start()] += 1.0;
    }
    const double share = static_cast<double>(members.size()) / batch_size;
    for (double& v : p0) v /= static_cast<double>(members.size());

    const LogLikelihood ll = demo_loglik(mdp, policy, group);
    stats.nll -= ll.value * static_cast<double>(members.size());

    const SvfVector mu_d = empirical_svf(paths, n);
    const SvfVector mu_e = expected_svf(mdp, policy, p0, horizon);
    stats.mass_error = std::max(stats.mass_error, std::abs(mu_e.total() - static_cast<double>(horizon + 1)));

    if (loss == LossKind::maxent) {
      const std::vector<double> ascent = maxent_reward_grad(mu_d, mu_e);
      stats.objective -= ll.value * share;
      for (std::size_t s = 0; s < n; ++s) net.accumulate_gradient(tapes[s], -ascent[s] * share, grad);
    } else {
      const MseResult mse = mse_objective(rewards, mu_d.mass);
      stats.objective += mse.loss * share;
      for (std::size_t s = 0; s < n; ++s) net.accumulate_gradient(tapes[s], mse.grad[s] * share, grad);
    }
  }
  return stats;
}

inline double l2_norm(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

inline std::string format_norm(std::span<const double> v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", l2_norm(v));
  return buf;
}

}  // namespace detail

/// Trains `net` in place. Each epoch walks the demos in batches (order
/// shuffled from cfg.seed when there is more than one batch) and applies
/// one Adam step per batch on
///   maxent: L = -mean log P(demo) + weight_decay |theta|^2 / 2,
///           dL/dR = E[mu] - mu_D
///   mse:    L = mean_s (mu_D(s) - R(s))^2 + weight_decay |theta|^2 / 2
inline TrainResult train(const GridMDP& mdp, RewardNetwork& net, std::span<const Demo> demos, FeatureMode mode,
                         const TrainingConfig& cfg, const std::function<void(const EpochRecord&)>& on_epoch = {}) {
  validate(cfg);
  if (net.input_width() != feature_dim(mdp, mode))
    fail(ErrorCode::dimension_mismatch, "network input width " + std::to_string(net.input_width()) +
                                            " != feature dimension " + std::to_string(feature_dim(mdp, mode)));
  TrainResult result;
  const std::vector<Demo> padded = prepare_demos(mdp, demos, cfg.horizon, &result.horizon);
  const std::size_t T = result.horizon;

  AdamState opt = AdamState::for_network(net, cfg.lr, cfg.weight_decay);
  const std::size_t batch = cfg.batch_size == 0 ? padded.size() : std::min(cfg.batch_size, padded.size());
  std::vector<std::size_t> order(padded.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng shuffle_rng(derive_seed(cfg.seed, SeedStream::batch_order));
  Gradients grad(net.parameter_count());

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    if (batch < padded.size())
      for (std::size_t i = order.size(); i-- > 1;) std::swap(order[i], order[shuffle_rng.below(i + 1)]);

    EpochRecord rec;
    rec.epoch = static_cast<std::size_t>(epoch);
    double objective_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += batch) {
      const std::size_t end = std::min(order.size(), begin + batch);
      std::span<const std::size_t> members(order.data() + begin, end - begin);
      std::fill(grad.begin(), grad.end(), 0.0);
      try {
        const detail::BatchStats stats = detail::batch_gradient(mdp, net, padded, members, mode, cfg.loss, T, grad);
        if (!std::isfinite(stats.objective)) fail(ErrorCode::training_aborted, "non-finite loss");
        objective_sum += stats.objective * static_cast<double>(members.size());
        rec.demo_nll += stats.nll;
        rec.policy_row_error = std::max(rec.policy_row_error, stats.row_error);
        rec.svf_mass_error = std::max(rec.svf_mass_error, stats.mass_error);
        add_weight_decay(net, cfg.weight_decay, grad);
        adam_step(net, grad, opt);
      } catch (const Error& e) {
        fail(ErrorCode::training_aborted, "epoch " + std::to_string(epoch) + ": " + e.what() +
                                              " (|theta| = " + detail::format_norm(net.params()) + ")");
      }
    }
    rec.loss = objective_sum / static_cast<double>(padded.size());
    rec.demo_nll /= static_cast<double>(padded.size());
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    result.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return result;
}

}  // namespace medirl
