#pragma once

#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "medirl/error.hpp"
#include "medirl/grid.hpp"
#include "medirl/maxent.hpp"
#include "medirl/random.hpp"
#include "medirl/reward_net.hpp"
#include "medirl/train.hpp"
#include "medirl/trajectory.hpp"

namespace medirl {

namespace detail {

inline std::size_t sample_index(std::span<const double> probs, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  // Rounding left u above the running sum; take the last non-zero entry.
  for (std::size_t i = probs.size(); i-- > 0;)
    if (probs[i] > 0.0) return i;
  return probs.size() - 1;
}

inline Trajectory path_to_trajectory(const GridMDP& mdp, std::string id, std::vector<std::size_t> states,
                                     std::vector<std::size_t> actions) {
  Trajectory traj;
  traj.id = std::move(id);
  traj.dims = mdp.dims();
  for (std::size_t i = 0; i < states.size(); ++i)
    traj.points.push_back(Waypoint{static_cast<double>(i), cell_center(mdp, states[i])});
  traj.states = std::move(states);
  traj.actions = std::move(actions);
  return traj;
}

}  // namespace detail

enum class RolloutMode { greedy, sample };

/// Open-loop rollout of T steps from `start` using pi_t at step t. Greedy
/// takes the most probable action (lowest index on ties). Points sit at
/// cell centers with unit timesteps.
inline Trajectory rollout(const GridMDP& mdp, const SoftPolicy& policy, std::size_t start, std::size_t horizon,
                          RolloutMode mode, std::uint64_t seed = 0) {
  mdp.check_state(start);
  if (horizon < 1) fail(ErrorCode::invalid_config, "rollout horizon must be >= 1");
  if (policy.horizon() < horizon) fail(ErrorCode::dimension_mismatch, "policy horizon shorter than rollout");
  if (policy.num_states() != mdp.num_states() || policy.num_actions() != mdp.num_actions())
    fail(ErrorCode::dimension_mismatch, "policy shape does not match the MDP");
  Rng rng(seed);
  std::vector<std::size_t> states{start};
  std::vector<std::size_t> actions;
  std::size_t s = start;
  for (std::size_t t = 0; t < horizon; ++t) {
    const auto row = policy.row(t, s);
    std::size_t a = 0;
    if (mode == RolloutMode::greedy) {
      for (std::size_t k = 1; k < row.size(); ++k)
        if (row[k] > row[a]) a = k;
    } else {
      a = detail::sample_index(row, rng);
    }
    s = mdp.transition(s, a);
    actions.push_back(a);
    states.push_back(s);
  }
  return detail::path_to_trajectory(mdp, "rollout", std::move(states), std::move(actions));
}

/// Samples `count` demonstrations of T+1 states from the soft-optimal
/// policy of `true_reward`, starting from uniformly drawn states. Ids are
/// zero-padded so lexical order matches generation order.
inline std::vector<Trajectory> generate_synthetic(const GridMDP& mdp, std::span<const double> true_reward,
                                                  std::size_t count, std::size_t horizon, std::uint64_t seed) {
  if (count < 1) fail(ErrorCode::invalid_config, "count must be >= 1");
  if (horizon < 1) fail(ErrorCode::invalid_config, "horizon must be >= 1");
  const SoftPolicy policy = soft_value_iteration(mdp, true_reward, horizon);
  Rng rng(seed);
  std::vector<Trajectory> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t start = rng.below(mdp.num_states());
    std::vector<std::size_t> states{start};
    std::vector<std::size_t> actions;
    std::size_t s = start;
    for (std::size_t t = 0; t < horizon; ++t) {
      const std::size_t a = detail::sample_index(policy.row(t, s), rng);
      s = mdp.transition(s, a);
      actions.push_back(a);
      states.push_back(s);
    }
    char id[32];
    std::snprintf(id, sizeof(id), "syn%05zu", i);
    out.push_back(detail::path_to_trajectory(mdp, id, std::move(states), std::move(actions)));
  }
  return out;
}

/// Discretizes a trajectory onto the MDP (projecting away axes the grid
/// lacks) and turns it into a training demo.
inline Demo to_demo(const GridMDP& mdp, const Trajectory& traj) {
  const Trajectory local = traj.dims == mdp.dims() ? traj : project(traj, mdp.dims());
  const std::vector<Position> pts = local.positions();
  std::vector<std::size_t> states;
  if (!local.states.empty() && local.dims == mdp.dims()) {
    states = local.states;
  } else {
    try {
      states = discretize(pts, mdp.spec());
    } catch (const Error& e) {
      fail(e.code(), "trajectory " + traj.id + ": " + e.what());
    }
  }
  try {
    return make_demo(mdp, std::move(states));
  } catch (const Error& e) {
    fail(e.code(), "trajectory " + traj.id + ": " + e.what());
  }
}

inline std::vector<Demo> to_demos(const GridMDP& mdp, const std::vector<Trajectory>& trajs) {
  std::vector<Demo> out;
  out.reserve(trajs.size());
  for (const Trajectory& t : trajs) out.push_back(to_demo(mdp, t));
  return out;
}

struct TrajectoryResult {
  std::string id;
  DisplacementReport metrics;
};

struct EvaluationReport {
  std::vector<TrajectoryResult> rows;  // sorted by id
  double mean_ade = 0.0;
  double mean_fde = 0.0;
  double mean_nde = 0.0;  // over rows with NDE defined
  std::size_t n = 0;
  std::size_t n_nde = 0;
};

inline EvaluationReport aggregate(std::vector<TrajectoryResult> rows) {
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  EvaluationReport rep;
  rep.n = rows.size();
  for (const TrajectoryResult& r : rows) {
    rep.mean_ade += r.metrics.ade;
    rep.mean_fde += r.metrics.fde;
    if (r.metrics.nde_defined) {
      rep.mean_nde += r.metrics.nde;
      ++rep.n_nde;
    }
  }
  if (rep.n > 0) {
    rep.mean_ade /= static_cast<double>(rep.n);
    rep.mean_fde /= static_cast<double>(rep.n);
  }
  if (rep.n_nde > 0) rep.mean_nde /= static_cast<double>(rep.n_nde);
  rep.rows = std::move(rows);
  return rep;
}

/// Goal-conditioned reward map: goal state -> reward per state.
using RewardProvider = std::function<std::vector<double>(std::size_t goal)>;

/// For each test trajectory: condition on its endpoint, run soft VI over
/// its length, roll out greedily from its start, and score the rollout
/// point-by-point against the truth (rollout step i aligned with sample i).
inline EvaluationReport evaluate(const GridMDP& mdp, const RewardProvider& rewards_for_goal,
                                 const std::vector<Trajectory>& test_set) {
  if (test_set.empty()) fail(ErrorCode::empty_test_set, "test set is empty");
  std::vector<TrajectoryResult> rows;
  for (const Trajectory& raw : test_set) {
    const Trajectory truth = raw.dims == mdp.dims() ? raw : project(raw, mdp.dims());
    validate(truth);
    const Demo demo = to_demo(mdp, truth);
    const std::size_t T = demo.horizon();
    const std::vector<double> r = rewards_for_goal(demo.goal());
    const SoftPolicy policy = soft_value_iteration(mdp, r, T);
    Trajectory pred = rollout(mdp, policy, demo.start(), T, RolloutMode::greedy);
    for (std::size_t i = 0; i < pred.points.size(); ++i) pred.points[i].t = truth.points[i].t;
    rows.push_back({truth.id, displacement_metrics(pred, truth)});
  }
  return aggregate(std::move(rows));
}

inline EvaluationReport evaluate(const GridMDP& mdp, const RewardNetwork& net, FeatureMode mode,
                                 const std::vector<Trajectory>& test_set) {
  return evaluate(
      mdp, [&](std::size_t goal) { return state_rewards(mdp, net, goal, mode); }, test_set);
}

/// Mean ADE of uniformly random rollouts (`samples` per trajectory), the
/// no-information reference for a trained model.
inline double uniform_baseline_ade(const GridMDP& mdp, const std::vector<Trajectory>& test_set, std::size_t samples,
                                   std::uint64_t seed) {
  if (test_set.empty()) fail(ErrorCode::empty_test_set, "test set is empty");
  if (samples < 1) fail(ErrorCode::invalid_config, "samples must be >= 1");
  Rng seeds(seed);
  double total = 0.0;
  for (const Trajectory& raw : test_set) {
    const Trajectory truth = raw.dims == mdp.dims() ? raw : project(raw, mdp.dims());
    const Demo demo = to_demo(mdp, truth);
    const SoftPolicy uniform = SoftPolicy::uniform(mdp.num_states(), mdp.num_actions(), demo.horizon());
    for (std::size_t k = 0; k < samples; ++k) {
      Trajectory pred = rollout(mdp, uniform, demo.start(), demo.horizon(), RolloutMode::sample, seeds.next_u64());
      for (std::size_t i = 0; i < pred.points.size(); ++i) pred.points[i].t = truth.points[i].t;
      total += displacement_metrics(pred, truth).ade;
    }
  }
  return total / static_cast<double>(test_set.size() * samples);
}

}  // namespace medirl
