#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "medirl/error.hpp"
#include "medirl/grid.hpp"

namespace medirl {

/// Time-indexed Boltzmann policy pi_t(a|s) for t = 0..horizon-1, produced
/// by finite-horizon soft value iteration.
class SoftPolicy {
 public:
  SoftPolicy() = default;

  SoftPolicy(std::size_t states, std::size_t actions, std::size_t horizon)
      : n_(states), p_(actions), horizon_(horizon), probs_(horizon * states * actions, 0.0) {}

  /// Same n x p table at every step. Rows are validated.
  static SoftPolicy stationary(std::size_t states, std::size_t actions, std::size_t horizon,
                               std::span<const double> table) {
    if (table.size() != states * actions) fail(ErrorCode::dimension_mismatch, "policy table has wrong size");
    SoftPolicy pol(states, actions, horizon);
    for (std::size_t t = 0; t < horizon; ++t)
      std::copy(table.begin(), table.end(), pol.probs_.begin() + static_cast<std::ptrdiff_t>(t * states * actions));
    if (pol.max_row_error() > 1e-9) fail(ErrorCode::invalid_distribution, "policy rows must sum to 1");
    for (double v : table)
      if (!(v >= 0.0)) fail(ErrorCode::invalid_distribution, "policy entries must be non-negative");
    return pol;
  }

  static SoftPolicy uniform(std::size_t states, std::size_t actions, std::size_t horizon) {
    std::vector<double> table(states * actions, 1.0 / static_cast<double>(actions));
    return stationary(states, actions, horizon, table);
  }

  std::size_t num_states() const noexcept { return n_; }
  std::size_t num_actions() const noexcept { return p_; }
  std::size_t horizon() const noexcept { return horizon_; }

  std::span<const double> row(std::size_t t, std::size_t s) const {
    return {probs_.data() + (t * n_ + s) * p_, p_};
  }
  std::span<double> row(std::size_t t, std::size_t s) { return {probs_.data() + (t * n_ + s) * p_, p_}; }

  double prob(std::size_t t, std::size_t s, std::size_t a) const { return probs_.at((t * n_ + s) * p_ + a); }

  /// Largest |sum_a pi_t(a|s) - 1| over every row.
  double max_row_error() const {
    double worst = 0.0;
    for (std::size_t r = 0; r < horizon_ * n_; ++r) {
      double sum = 0.0;
      for (std::size_t a = 0; a < p_; ++a) sum += probs_[r * p_ + a];
      worst = std::max(worst, std::abs(sum - 1.0));
    }
    return worst;
  }

 private:
  std::size_t n_ = 0;
  std::size_t p_ = 0;
  std::size_t horizon_ = 0;
  std::vector<double> probs_;
};

/// Backward soft Bellman recursion over `horizon` steps:
///   V_T(s)   = R(s)
///   Q_t(s,a) = R(s) + gamma * V_{t+1}(next(s,a))
///   V_t(s)   = logsumexp_a Q_t(s,a)
///   pi_t     = exp(Q_t - V_t)
/// With gamma = 1, pi induces P(path) proportional to exp(sum of rewards
/// along the T+1 visited states), which is the MaxEnt path distribution.
inline SoftPolicy soft_value_iteration(const GridMDP& mdp, std::span<const double> rewards, std::size_t horizon) {
  const std::size_t n = mdp.num_states();
  const std::size_t p = mdp.num_actions();
  if (rewards.size() != n)
    fail(ErrorCode::dimension_mismatch, "reward vector length " + std::to_string(rewards.size()) + " != " +
                                            std::to_string(n) + " states");
  for (double r : rewards)
    if (!std::isfinite(r)) fail(ErrorCode::non_finite_rewards, "reward vector contains a non-finite entry");
  if (horizon < 1) fail(ErrorCode::invalid_config, "horizon must be >= 1");

  const double gamma = mdp.gamma();
  SoftPolicy policy(n, p, horizon);
  std::vector<double> value(rewards.begin(), rewards.end());
  std::vector<double> next_value(n);
  std::vector<double> q(p);
  for (std::size_t t = horizon; t-- > 0;) {
    for (std::size_t s = 0; s < n; ++s) {
      const auto succ = mdp.successors(s);
      double qmax = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < p; ++a) {
        q[a] = rewards[s] + gamma * value[succ[a]];
        qmax = std::max(qmax, q[a]);
      }
      double z = 0.0;
      for (std::size_t a = 0; a < p; ++a) z += std::exp(q[a] - qmax);
      const double v = qmax + std::log(z);
      auto row = policy.row(t, s);
      for (std::size_t a = 0; a < p; ++a) row[a] = std::exp(q[a] - v);
      next_value[s] = v;
    }
    value.swap(next_value);
  }
  return policy;
}

enum class SvfKind { empirical, expected };

struct SvfVector {
  std::vector<double> mass;
  SvfKind kind = SvfKind::expected;
  std::size_t horizon = 0;

  double total() const {
    double sum = 0.0;
    for (double m : mass) sum += m;
    return sum;
  }
};

/// Forward propagation of state occupancy: D_0 = p0,
/// D_{t+1}(s') = sum_{s,a} D_t(s) pi_t(a|s) [next(s,a) = s'], mu = sum_t D_t.
inline SvfVector expected_svf(const GridMDP& mdp, const SoftPolicy& policy, std::span<const double> p0,
                              std::size_t horizon) {
  const std::size_t n = mdp.num_states();
  const std::size_t p = mdp.num_actions();
  if (policy.num_states() != n || policy.num_actions() != p)
    fail(ErrorCode::dimension_mismatch, "policy shape does not match the MDP");
  if (policy.horizon() < horizon) fail(ErrorCode::dimension_mismatch, "policy horizon shorter than requested");
  if (p0.size() != n) fail(ErrorCode::invalid_distribution, "initial distribution has wrong length");
  double total = 0.0;
  for (double v : p0) {
    if (!(v >= 0.0) || !std::isfinite(v)) fail(ErrorCode::invalid_distribution, "initial distribution has a negative entry");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9)
    fail(ErrorCode::invalid_distribution, "initial distribution sums to " + std::to_string(total));

  SvfVector mu{std::vector<double>(p0.begin(), p0.end()), SvfKind::expected, horizon};
  std::vector<double> cur(p0.begin(), p0.end());
  std::vector<double> next(n);
  for (std::size_t t = 0; t < horizon; ++t) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t s = 0; s < n; ++s) {
      const double d = cur[s];
      if (d == 0.0) continue;
      const auto succ = mdp.successors(s);
      const auto row = policy.row(t, s);
      for (std::size_t a = 0; a < p; ++a) next[succ[a]] += d * row[a];
    }
    for (std::size_t s = 0; s < n; ++s) mu.mass[s] += next[s];
    cur.swap(next);
  }
  return mu;
}

/// Average per-demo visit counts. All demos must have the same length T+1.
inline SvfVector empirical_svf(std::span<const std::vector<std::size_t>> demos, std::size_t n) {
  if (demos.empty()) fail(ErrorCode::empty_demo_set, "no demonstrations");
  const std::size_t len = demos.front().size();
  if (len == 0) fail(ErrorCode::empty_demo_set, "demonstration has no states");
  SvfVector mu{std::vector<double>(n, 0.0), SvfKind::empirical, len - 1};
  for (std::size_t i = 0; i < demos.size(); ++i) {
    if (demos[i].size() != len)
      fail(ErrorCode::ragged_lengths, "demo " + std::to_string(i) + " has " + std::to_string(demos[i].size()) +
                                          " states, expected " + std::to_string(len));
    for (std::size_t s : demos[i]) {
      if (s >= n) fail(ErrorCode::index_out_of_range, "demo state " + std::to_string(s) + " >= " + std::to_string(n));
      mu.mass[s] += 1.0;
    }
  }
  const double inv = 1.0 / static_cast<double>(demos.size());
  for (double& m : mu.mass) m *= inv;
  return mu;
}

/// Ascent direction of the demo log-likelihood w.r.t. per-state rewards:
/// mu_D - E[mu]. Training descends on the negated objective, so it feeds
/// the negation of this vector into the network's backward pass.
inline std::vector<double> maxent_reward_grad(const SvfVector& empirical, const SvfVector& expected) {
  if (empirical.mass.size() != expected.mass.size())
    fail(ErrorCode::length_mismatch, "SVF vectors differ in length");
  if (empirical.kind != SvfKind::empirical || expected.kind != SvfKind::expected)
    fail(ErrorCode::kind_mismatch, "expected (empirical, expected) SVF pair");
  if (empirical.horizon != expected.horizon)
    fail(ErrorCode::length_mismatch, "SVF vectors were computed over different horizons");
  std::vector<double> g(empirical.mass.size());
  for (std::size_t s = 0; s < g.size(); ++s) g[s] = empirical.mass[s] - expected.mass[s];
  return g;
}

/// A discretized demonstration: T+1 states and the T actions between them.
struct Demo {
  std::vector<std::size_t> states;
  std::vector<std::size_t> actions;

  std::size_t horizon() const { return actions.size(); }
  std::size_t start() const { return states.front(); }
  std::size_t goal() const { return states.back(); }
};

/// Recovers actions from consecutive states. Where several actions reach
/// the same cell (boundary clamping) the lowest-index one is used.
inline Demo make_demo(const GridMDP& mdp, std::vector<std::size_t> states) {
  if (states.size() < 2) fail(ErrorCode::invalid_demo, "a demonstration needs at least two states");
  Demo demo;
  demo.actions.reserve(states.size() - 1);
  for (std::size_t t = 0; t + 1 < states.size(); ++t) {
    const std::size_t a = mdp.action_between(states[t], states[t + 1]);
    if (a == mdp.num_actions())
      fail(ErrorCode::invalid_demo, "states " + std::to_string(states[t]) + " -> " + std::to_string(states[t + 1]) +
                                        " at step " + std::to_string(t) + " are not one move apart");
    demo.actions.push_back(a);
  }
  demo.states = std::move(states);
  return demo;
}

/// Extends a demo to `length` states by repeating its terminal state with
/// the zero move. Longer demos are rejected.
inline Demo pad_demo(const GridMDP& mdp, Demo demo, std::size_t length) {
  if (demo.states.size() > length) fail(ErrorCode::ragged_lengths, "demo longer than the padding target");
  while (demo.states.size() < length) {
    demo.states.push_back(demo.states.back());
    demo.actions.push_back(mdp.stay_action());
  }
  return demo;
}

struct LogLikelihood {
  double value = 0.0;         ///< mean over demos of sum_t log pi_t(a_t|s_t)
  std::size_t floored = 0;    ///< number of zero-probability steps hit
};

inline constexpr double kLogProbFloor = -745.0;

inline LogLikelihood demo_loglik(const GridMDP& mdp, const SoftPolicy& policy, std::span<const Demo> demos) {
  if (demos.empty()) fail(ErrorCode::empty_demo_set, "no demonstrations");
  LogLikelihood out;
  double total = 0.0;
  for (std::size_t i = 0; i < demos.size(); ++i) {
    const Demo& d = demos[i];
    if (d.states.size() != d.actions.size() + 1)
      fail(ErrorCode::invalid_demo, "demo " + std::to_string(i) + " has mismatched state/action counts");
    if (d.horizon() > policy.horizon())
      fail(ErrorCode::dimension_mismatch, "demo " + std::to_string(i) + " is longer than the policy horizon");
    for (std::size_t t = 0; t < d.actions.size(); ++t) {
      const std::size_t s = d.states[t];
      const std::size_t a = d.actions[t];
      if (mdp.transition(s, a) != d.states[t + 1])
        fail(ErrorCode::invalid_demo, "demo " + std::to_string(i) + " step " + std::to_string(t) +
                                          " is inconsistent with the transition model");
      const double pr = policy.prob(t, s, a);
      double lp = pr > 0.0 ? std::log(pr) : kLogProbFloor;
      if (lp < kLogProbFloor) lp = kLogProbFloor;
      if (lp == kLogProbFloor) ++out.floored;
      total += lp;
    }
  }
  out.value = total / static_cast<double>(demos.size());
  return out;
}

struct MseResult {
  double loss = 0.0;
  std::vector<double> grad;  ///< dLoss / dprediction
};

/// (1/N) sum (y_i - f_i)^2 and its gradient -2 (y_i - f_i) / N.
inline MseResult mse_objective(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.size() != targets.size())
    fail(ErrorCode::length_mismatch, "predictions and targets differ in length");
  if (predictions.empty()) fail(ErrorCode::length_mismatch, "empty input");
  MseResult out;
  out.grad.resize(predictions.size());
  const double inv = 1.0 / static_cast<double>(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (!std::isfinite(predictions[i]) || !std::isfinite(targets[i]))
      fail(ErrorCode::non_finite_input, "non-finite value in MSE input");
    const double r = targets[i] - predictions[i];
    out.loss += r * r * inv;
    out.grad[i] = -2.0 * r * inv;
  }
  return out;
}

}  // namespace medirl
