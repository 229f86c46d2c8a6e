#include <gtest/gtest.h>

#include <sstream>

#include "medirl/experiment.hpp"
#include "medirl/prediction.hpp"
#include "medirl/trajectory.hpp"

using namespace medirl;

namespace {

Trajectory make_traj(std::string id, std::vector<Position> pts, int dims = 2) {
  Trajectory t;
  t.id = std::move(id);
  t.dims = dims;
  for (std::size_t i = 0; i < pts.size(); ++i) t.points.push_back({static_cast<double>(i), pts[i]});
  return t;
}

Trajectory random_traj(Rng& rng, std::size_t n, int dims = 2) {
  std::vector<Position> pts;
  for (std::size_t i = 0; i < n; ++i) {
    Position p{0, 0, 0};
    for (int d = 0; d < dims; ++d) p[d] = rng.uniform(-5, 5);
    pts.push_back(p);
  }
  return make_traj("r", pts, dims);
}

template <class Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::invalid_config;
}

}  // namespace

TEST(TrajectoryCsv, GroupsById) {
  std::istringstream in("id,t,x,y\nb,0,0,0\na,0,1,1\nb,1,0.5,0\na,1,1,2\nb,2,1,0\na,2,1,3\n");
  const auto trajs = parse_trajectories(in, 2);
  ASSERT_EQ(trajs.size(), 2u);
  EXPECT_EQ(trajs[0].id, "a");
  EXPECT_EQ(trajs[1].id, "b");
  EXPECT_EQ(trajs[0].points.size(), 3u);
  EXPECT_EQ(trajs[1].points.size(), 3u);
  EXPECT_EQ(trajs[1].points[1].pos[0], 0.5);
}

TEST(TrajectoryCsv, SchemaErrorCarriesLineNumber) {
  std::istringstream in("id,t,x,y\na,0,0,0\na,1,oops,0\n");
  try {
    parse_trajectories(in, 2, "f.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::schema_error);
    EXPECT_NE(std::string(e.what()).find("f.csv:3"), std::string::npos);
  }
  std::istringstream bad_header("id,x,y\n");
  EXPECT_EQ(code_of([&] { parse_trajectories(bad_header, 2); }), ErrorCode::schema_error);
  std::istringstream short_row("id,t,x,y\na,0,0\n");
  EXPECT_EQ(code_of([&] { parse_trajectories(short_row, 2); }), ErrorCode::schema_error);
  std::istringstream single("id,t,x,y\na,0,0,0\n");
  EXPECT_EQ(code_of([&] { parse_trajectories(single, 2); }), ErrorCode::schema_error);
  std::istringstream flat("id,t,x,y\na,0,0,0\na,1,0,0\n");
  EXPECT_EQ(code_of([&] { parse_trajectories(flat, 3); }), ErrorCode::schema_error);
}

TEST(TrajectoryCsv, NonMonotoneNamesId) {
  std::istringstream in("id,t,x,y\nped7,0,0,0\nped7,2,0,0\nped7,1,0,0\n");
  try {
    parse_trajectories(in, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::non_monotone_timestamps);
    EXPECT_NE(std::string(e.what()).find("ped7"), std::string::npos);
  }
}

TEST(TrajectoryCsv, ThreeDimensionalFileDropsZForPlanarGrid) {
  std::istringstream in("id,t,x,y,z\na,0,1,2,3\na,1,1,2,4\n");
  const auto trajs = parse_trajectories(in, 2);
  EXPECT_EQ(trajs[0].dims, 2);
  EXPECT_EQ(trajs[0].points[1].pos, (Position{1, 2, 0}));
}

TEST(TrajectoryCsv, WriteThenParseRoundTrips) {
  const GridMDP mdp(GridSpec{3, {4, 4, 2}, 0.3, {0.1, 0, 0}}, 1.0);
  const auto trajs = generate_synthetic(mdp, std::vector<double>(mdp.num_states(), 0.0), 4, 5, 9);
  std::istringstream in(format_trajectories(trajs));
  const auto back = parse_trajectories(in, 3);
  ASSERT_EQ(back.size(), trajs.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].id, trajs[i].id);
    EXPECT_EQ(back[i].points, trajs[i].points);
  }
}

TEST(TrajectoryCsv, MissingFileIsIoError) {
  EXPECT_EQ(code_of([] { load_trajectories("/no/such/file.csv", GridSpec{}); }), ErrorCode::io_error);
}

TEST(Metrics, IdentityAndOffset) {
  const auto truth = make_traj("a", {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {2, 2, 0}});
  const auto same = displacement_metrics(truth, truth);
  EXPECT_EQ(same.ade, 0.0);
  EXPECT_EQ(same.fde, 0.0);
  Trajectory shifted = truth;
  for (auto& w : shifted.points) w.pos[0] += 1.0;
  const auto rep = displacement_metrics(shifted, truth);
  EXPECT_DOUBLE_EQ(rep.ade, 1.0);
  EXPECT_DOUBLE_EQ(rep.fde, 1.0);
  EXPECT_TRUE(rep.nde_defined);
  EXPECT_EQ(rep.n_nonlinear_points, 2u);
  EXPECT_DOUBLE_EQ(rep.nde, 1.0);
}

TEST(Metrics, StraightLineHasUndefinedNde) {
  const auto truth = make_traj("a", {{0, 0, 0}, {1, 1, 0}, {2, 2, 0}, {3, 3, 0}});
  const auto rep = displacement_metrics(truth, truth);
  EXPECT_FALSE(rep.nde_defined);
  EXPECT_EQ(rep.n_nonlinear_points, 0u);
}

TEST(Metrics, Errors) {
  const auto a = make_traj("a", {{0, 0, 0}, {1, 1, 0}});
  const auto b = make_traj("b", {{0, 0, 0}, {1, 1, 0}, {2, 2, 0}});
  EXPECT_EQ(code_of([&] { displacement_metrics(a, b); }), ErrorCode::length_mismatch);
  auto c = a;
  c.dims = 3;
  EXPECT_EQ(code_of([&] { displacement_metrics(a, c); }), ErrorCode::dimension_mismatch);
}

TEST(Metrics, Properties) {
  Rng rng(55);
  for (int trial = 0; trial < 200; ++trial) {
    const int dims = trial % 2 ? 3 : 2;
    const std::size_t n = 2 + rng.below(10);
    const auto pred = random_traj(rng, n, dims);
    const auto truth = random_traj(rng, n, dims);
    const auto ab = displacement_metrics(pred, truth);
    const auto ba = displacement_metrics(truth, pred);
    EXPECT_DOUBLE_EQ(ab.ade, ba.ade);
    EXPECT_DOUBLE_EQ(ab.fde, ba.fde);
    double max_d = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_d = std::max(max_d, distance(pred.points[i].pos, truth.points[i].pos, dims));
    EXPECT_LE(ab.ade, max_d + 1e-12);
    EXPECT_LE(ab.fde, max_d + 1e-12);
    EXPECT_GE(ab.ade, 0.0);
    if (ab.nde_defined) EXPECT_LE(ab.nde, max_d + 1e-12);

    Position shift{rng.uniform(-3, 3), rng.uniform(-3, 3), dims == 3 ? rng.uniform(-3, 3) : 0.0};
    auto p2 = pred;
    auto t2 = truth;
    for (auto* t : {&p2, &t2})
      for (auto& w : t->points)
        for (int d = 0; d < 3; ++d) w.pos[d] += shift[d];
    EXPECT_NEAR(displacement_metrics(p2, t2).ade, ab.ade, 1e-9);
  }
}

TEST(Resample, LinearInterpolationOntoTimestamps) {
  Trajectory t;
  t.id = "a";
  t.points = {{0.0, {0, 0, 0}}, {2.0, {2, 4, 0}}};
  const auto r = resample(t, {-1.0, 0.5, 1.0, 3.0});
  EXPECT_EQ(r.points[0].pos, (Position{0, 0, 0}));
  EXPECT_EQ(r.points[1].pos, (Position{0.5, 1, 0}));
  EXPECT_EQ(r.points[2].pos, (Position{1, 2, 0}));
  EXPECT_EQ(r.points[3].pos, (Position{2, 4, 0}));
}

TEST(Rollout, UniformGreedyPicksActionZero) {
  const GridMDP mdp(GridSpec{2, {5, 5}, 1.0, {0, 0, 0}}, 0.5);
  const SoftPolicy pol = SoftPolicy::uniform(25, 9, 4);
  const auto traj = rollout(mdp, pol, 24, 4, RolloutMode::greedy);
  ASSERT_EQ(traj.points.size(), 5u);
  for (std::size_t a : traj.actions) EXPECT_EQ(a, 0u);
  EXPECT_EQ(traj.states, (std::vector<std::size_t>{24, 18, 12, 6, 0}));
}

TEST(Rollout, DeterministicPolicyFollowsItsPath) {
  const GridMDP mdp(GridSpec{2, {4, 1}, 1.0, {0, 0, 0}}, 0.5);
  std::vector<double> table(4 * 9, 0.0);
  for (std::size_t s = 0; s < 4; ++s) table[s * 9 + 5] = 1.0;
  const SoftPolicy pol = SoftPolicy::stationary(4, 9, 3, table);
  for (RolloutMode mode : {RolloutMode::greedy, RolloutMode::sample}) {
    const auto traj = rollout(mdp, pol, 0, 3, mode, 3);
    EXPECT_EQ(traj.states, (std::vector<std::size_t>{0, 1, 2, 3}));
    EXPECT_EQ(traj.points[2].pos, (Position{2.5, 0.5, 0}));
    EXPECT_EQ(traj.points[2].t, 2.0);
  }
}

TEST(Rollout, SampledIsReproducible) {
  const GridMDP mdp(GridSpec{2, {6, 6}, 1.0, {0, 0, 0}}, 0.5);
  const SoftPolicy pol = SoftPolicy::uniform(36, 9, 10);
  const auto a = rollout(mdp, pol, 14, 10, RolloutMode::sample, 42);
  const auto b = rollout(mdp, pol, 14, 10, RolloutMode::sample, 42);
  const auto c = rollout(mdp, pol, 14, 10, RolloutMode::sample, 43);
  EXPECT_EQ(a.states, b.states);
  EXPECT_NE(a.states, c.states);
}

TEST(Synthetic, CountsAndDeterminism) {
  const GridMDP mdp(GridSpec{2, {5, 5}, 0.5, {0, 0, 0}}, 1.0);
  const std::vector<double> r(25, 0.0);
  const auto a = generate_synthetic(mdp, r, 3, 5, 11);
  const auto b = generate_synthetic(mdp, r, 3, 5, 11);
  ASSERT_EQ(a.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(a[i].points.size(), 6u);
    EXPECT_EQ(a[i].states, b[i].states);
    EXPECT_EQ(a[i].points, b[i].points);
  }
  EXPECT_THROW(generate_synthetic(mdp, r, 0, 5, 1), Error);
}

TEST(Synthetic, PeakedRewardIsMostVisited) {
  const GridMDP mdp(GridSpec{2, {6, 6}, 1.0, {0, 0, 0}}, 1.0);
  std::vector<double> r(36, 0.0);
  const std::size_t peak = mdp.index_of({4, 1, 0});
  r[peak] = 5.0;
  const auto trajs = generate_synthetic(mdp, r, 100, 10, 8);
  std::vector<std::size_t> visits(36, 0);
  for (const auto& t : trajs)
    for (std::size_t s : t.states) ++visits[s];
  EXPECT_EQ(static_cast<std::size_t>(std::max_element(visits.begin(), visits.end()) - visits.begin()), peak);
}

TEST(Synthetic, DiscretizesBackToSampledStates) {
  for (int dims : {2, 3}) {
    GridSpec spec{dims, dims == 2 ? std::vector<int>{7, 5} : std::vector<int>{5, 4, 3}, 0.35, {1.0, -2.0, 0.5}};
    const GridMDP mdp(spec, 1.0);
    Rng rng(dims);
    std::vector<double> r(mdp.num_states());
    for (double& x : r) x = rng.uniform(-1, 1);
    for (const auto& t : generate_synthetic(mdp, r, 20, 8, 100 + dims)) {
      const auto pts = t.positions();
      EXPECT_EQ(discretize(pts, spec), t.states);
    }
  }
}

TEST(Evaluate, TrueRewardBeatsUniformBaseline) {
  const GridMDP mdp(GridSpec{2, {8, 8}, 1.0, {0, 0, 0}}, 1.0);
  const auto r = synthetic_reward(mdp, SyntheticData{});
  const auto test = generate_synthetic(mdp, r, 20, 12, 77);
  const auto rep = evaluate(mdp, [&](std::size_t) { return r; }, test);
  EXPECT_EQ(rep.n, 20u);
  EXPECT_LE(rep.mean_ade, uniform_baseline_ade(mdp, test, 10, 1));
  for (std::size_t i = 1; i < rep.rows.size(); ++i) EXPECT_LT(rep.rows[i - 1].id, rep.rows[i].id);
}

TEST(Evaluate, DeterministicAndPreconditions) {
  const GridMDP mdp(GridSpec{2, {6, 6}, 1.0, {0, 0, 0}}, 1.0);
  ExperimentConfig cfg;
  cfg.grid = mdp.spec();
  const auto net = init_network(layer_specs(cfg, 4), 4);
  const auto test = generate_synthetic(mdp, std::vector<double>(36, 0.0), 5, 6, 2);
  const auto a = evaluate(mdp, net, FeatureMode::coordinates, test);
  const auto b = evaluate(mdp, net, FeatureMode::coordinates, test);
  EXPECT_EQ(format_metrics_csv(a), format_metrics_csv(b));
  EXPECT_EQ(code_of([&] { evaluate(mdp, net, FeatureMode::coordinates, {}); }), ErrorCode::empty_test_set);
  // A single-point trajectory has no step to predict.
  Trajectory degenerate;
  degenerate.id = "x";
  degenerate.points = {{0.0, {0.5, 0.5, 0}}};
  EXPECT_THROW(evaluate(mdp, net, FeatureMode::coordinates, {degenerate}), Error);
}
