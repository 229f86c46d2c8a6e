#include <gtest/gtest.h>

#include "medirl/grid.hpp"

using namespace medirl;

namespace {

GridSpec spec2(int ex, int ey, double cell = 1.0) { return GridSpec{2, {ex, ey}, cell, {0.0, 0.0, 0.0}}; }

}  // namespace

TEST(Grid, CountsStatesAndActions) {
  const GridMDP a(spec2(3, 3), 0.5);
  EXPECT_EQ(a.num_states(), 9u);
  EXPECT_EQ(a.num_actions(), 9u);
  const GridMDP b(GridSpec{3, {2, 2, 2}, 1.0, {0, 0, 0}}, 0.5);
  EXPECT_EQ(b.num_states(), 8u);
  EXPECT_EQ(b.num_actions(), 27u);
  EXPECT_EQ(state_count(b.spec()), b.num_states());
}

TEST(Grid, DefaultGammaRangeAndErrors) {
  EXPECT_NO_THROW(GridMDP(spec2(2, 2), 0.0));
  EXPECT_NO_THROW(GridMDP(spec2(2, 2), 1.0));
  try {
    GridMDP(spec2(2, 2), 1.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_gamma);
  }
  try {
    GridMDP(spec2(0, 2), 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_spec);
  }
  try {
    GridMDP(spec2(2, 2, 0.0), 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_spec);
  }
  EXPECT_THROW(GridMDP(GridSpec{4, {1, 1, 1, 1}, 1.0, {}}, 0.5), Error);
}

TEST(Grid, CornerMoveClamps) {
  const GridMDP mdp(spec2(3, 3), 0.5);
  const Cell off = mdp.offset(0);
  EXPECT_EQ(off[0], -1);
  EXPECT_EQ(off[1], -1);
  EXPECT_EQ(mdp.transition(mdp.index_of({0, 0, 0}), 0), mdp.index_of({0, 0, 0}));
  // (-1, 0) from (0, 1) clamps x only
  EXPECT_EQ(mdp.transition(mdp.index_of({0, 1, 0}), 3), mdp.index_of({0, 1, 0}));
  // (+1,+1) from (0,1) -> (1,2)
  EXPECT_EQ(mdp.transition(mdp.index_of({0, 1, 0}), 8), mdp.index_of({1, 2, 0}));
}

TEST(Grid, RowMajorAxisZeroFastest) {
  const GridMDP mdp(GridSpec{3, {4, 3, 2}, 1.0, {0, 0, 0}}, 0.5);
  EXPECT_EQ(mdp.index_of({1, 0, 0}), 1u);
  EXPECT_EQ(mdp.index_of({0, 1, 0}), 4u);
  EXPECT_EQ(mdp.index_of({0, 0, 1}), 12u);
  for (std::size_t s = 0; s < mdp.num_states(); ++s) EXPECT_EQ(mdp.index_of(mdp.cell_of(s)), s);
}

TEST(Grid, StayActionIsZeroMove) {
  for (int dims : {2, 3}) {
    GridSpec spec{dims, std::vector<int>(dims, 3), 1.0, {0, 0, 0}};
    const GridMDP mdp(spec, 0.5);
    const Cell off = mdp.offset(mdp.stay_action());
    for (int d = 0; d < 3; ++d) EXPECT_EQ(off[d], 0);
    for (std::size_t s = 0; s < mdp.num_states(); ++s) EXPECT_EQ(mdp.transition(s, mdp.stay_action()), s);
  }
}

TEST(Grid, TransitionsTotalAndTranslationConsistent) {
  for (int dims : {2, 3}) {
    GridSpec spec{dims, dims == 2 ? std::vector<int>{5, 4} : std::vector<int>{4, 3, 3}, 1.0, {0, 0, 0}};
    const GridMDP mdp(spec, 0.5);
    for (std::size_t s = 0; s < mdp.num_states(); ++s) {
      const Cell c = mdp.cell_of(s);
      bool interior = true;
      for (int d = 0; d < dims; ++d) interior = interior && c[d] > 0 && c[d] + 1 < spec.extent[d];
      for (std::size_t a = 0; a < mdp.num_actions(); ++a) {
        const std::size_t next = mdp.transition(s, a);
        ASSERT_LT(next, mdp.num_states());
        if (interior) {
          Cell expect = c;
          for (int d = 0; d < dims; ++d) expect[d] += mdp.offset(a)[d];
          EXPECT_EQ(next, mdp.index_of(expect));
        }
      }
    }
  }
}

TEST(Grid, TransitionRejectsBadIndices) {
  const GridMDP mdp(spec2(2, 2), 0.5);
  EXPECT_THROW(mdp.transition(4, 0), Error);
  EXPECT_THROW(mdp.transition(0, 9), Error);
}

TEST(Features, OneHot) {
  const GridMDP mdp(spec2(3, 3), 0.5);
  const auto phi = features(mdp, 4, 0, FeatureMode::one_hot);
  ASSERT_EQ(phi.size(), 9u);
  for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(phi[i], i == 4 ? 1.0 : 0.0);
}

TEST(Features, Coordinates) {
  const GridMDP mdp(spec2(3, 3), 0.5);
  const std::size_t s22 = mdp.index_of({2, 2, 0});
  const std::size_t s00 = mdp.index_of({0, 0, 0});
  EXPECT_EQ(features(mdp, s22, s22, FeatureMode::coordinates), (std::vector<double>{1, 1, 0, 0}));
  EXPECT_EQ(features(mdp, s00, s22, FeatureMode::coordinates), (std::vector<double>{0, 0, 1, 1}));
}

TEST(Features, CoordinatesFiniteForUnitExtentAndPure) {
  const GridMDP mdp(GridSpec{3, {4, 1, 3}, 1.0, {0, 0, 0}}, 0.5);
  for (std::size_t s = 0; s < mdp.num_states(); ++s) {
    const auto a = features(mdp, s, 5, FeatureMode::coordinates);
    const auto b = features(mdp, s, 5, FeatureMode::coordinates);
    ASSERT_EQ(a.size(), 6u);
    EXPECT_EQ(a, b);
    for (double v : a) EXPECT_TRUE(std::isfinite(v));
    EXPECT_EQ(a[1], 0.0);
  }
  EXPECT_THROW(features(mdp, 12, 0, FeatureMode::coordinates), Error);
  EXPECT_THROW(features(mdp, 0, 12, FeatureMode::one_hot), Error);
}

TEST(Discretize, FloorDivision) {
  const GridSpec spec = spec2(4, 4, 0.5);
  const std::vector<Position> pts{{0.1, 0.1, 0}, {0.6, 1.2, 0}, {0.6, 1.2, 0}};
  const auto states = discretize(pts, spec);
  const GridMDP mdp(spec, 0.5);
  EXPECT_EQ(states[0], mdp.index_of({0, 0, 0}));
  EXPECT_EQ(states[1], mdp.index_of({1, 2, 0}));
  EXPECT_EQ(states[2], states[1]);
}

TEST(Discretize, UpperBoundaryFallsInLastCell) {
  const GridSpec spec = spec2(4, 4, 0.5);
  const std::vector<Position> pts{{2.0, 2.0, 0}};
  EXPECT_EQ(discretize(pts, spec)[0], 15u);
}

TEST(Discretize, ReportsOffendingPoint) {
  GridSpec spec = spec2(2, 2, 1.0);
  spec.origin = {1.0, 1.0, 0.0};
  const std::vector<Position> pts{{1.5, 1.5, 0}, {0.9, 1.5, 0}};
  try {
    discretize(pts, spec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::point_out_of_bounds);
    EXPECT_NE(std::string(e.what()).find("point 1"), std::string::npos);
  }
}

TEST(Discretize, CellCenterRoundTrip) {
  for (int dims : {2, 3}) {
    GridSpec spec{dims, dims == 2 ? std::vector<int>{5, 3} : std::vector<int>{3, 4, 2}, 0.4, {-1.0, 2.5, 0.3}};
    const GridMDP mdp(spec, 0.5);
    std::vector<Position> centers;
    for (std::size_t s = 0; s < mdp.num_states(); ++s) centers.push_back(cell_center(mdp, s));
    const auto back = discretize(centers, spec);
    for (std::size_t s = 0; s < mdp.num_states(); ++s) EXPECT_EQ(back[s], s);
  }
}

TEST(Grid, ActionBetween) {
  const GridMDP mdp(spec2(3, 3), 0.5);
  EXPECT_EQ(mdp.action_between(4, 4), mdp.stay_action());
  EXPECT_EQ(mdp.action_between(0, 0), 0u);  // clamped corner: lowest index wins
  EXPECT_EQ(mdp.action_between(0, 8), mdp.num_actions());
}
