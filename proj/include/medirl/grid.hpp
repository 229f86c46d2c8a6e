#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "medirl/error.hpp"

namespace medirl {

/// World-space position in meters. Unused trailing axes are zero.
using Position = std::array<double, 3>;

struct GridSpec {
  int dims = 2;
  std::vector<int> extent{8, 8};
  double cell_size = 1.0;
  Position origin{0.0, 0.0, 0.0};

  bool operator==(const GridSpec&) const = default;
};

inline void validate(const GridSpec& spec) {
  if (spec.dims != 2 && spec.dims != 3)
    fail(ErrorCode::invalid_spec, "dims must be 2 or 3, got " + std::to_string(spec.dims));
  if (static_cast<int>(spec.extent.size()) != spec.dims)
    fail(ErrorCode::invalid_spec, "extent has " + std::to_string(spec.extent.size()) +
                                      " entries for dims=" + std::to_string(spec.dims));
  for (int e : spec.extent)
    if (e < 1) fail(ErrorCode::invalid_spec, "extent entries must be >= 1");
  if (!(spec.cell_size > 0.0) || !std::isfinite(spec.cell_size))
    fail(ErrorCode::invalid_spec, "cell_size must be positive");
  for (double o : spec.origin)
    if (!std::isfinite(o)) fail(ErrorCode::invalid_spec, "origin must be finite");
}

inline std::size_t state_count(const GridSpec& spec) {
  std::size_t n = 1;
  for (int e : spec.extent) n *= static_cast<std::size_t>(e);
  return n;
}

using Cell = std::array<int, 3>;

/// Deterministic gridworld over a Moore neighbourhood (including the zero
/// move). States are row-major with axis 0 fastest; action k encodes the
/// per-axis offsets {-1,0,+1} as base-3 digits, axis 0 least significant,
/// so action 0 is (-1,-1[,-1]) and the zero move sits in the middle.
/// Moves off the grid clamp on the violated axis.
class GridMDP {
 public:
  GridMDP(GridSpec spec, double gamma) : spec_(std::move(spec)), gamma_(gamma) {
    validate(spec_);
    if (!(gamma_ >= 0.0 && gamma_ <= 1.0))
      fail(ErrorCode::invalid_gamma, "gamma must lie in [0, 1], got " + std::to_string(gamma_));
    n_ = state_count(spec_);
    p_ = 1;
    for (int d = 0; d < spec_.dims; ++d) p_ *= 3;

    offsets_.resize(p_);
    for (std::size_t a = 0; a < p_; ++a) {
      std::size_t code = a;
      Cell off{0, 0, 0};
      for (int d = 0; d < spec_.dims; ++d) {
        off[d] = static_cast<int>(code % 3) - 1;
        code /= 3;
      }
      offsets_[a] = off;
    }

    next_.resize(n_ * p_);
    for (std::size_t s = 0; s < n_; ++s) {
      const Cell c = cell_of(s);
      for (std::size_t a = 0; a < p_; ++a) {
        Cell m = c;
        for (int d = 0; d < spec_.dims; ++d) {
          const int v = c[d] + offsets_[a][d];
          if (v >= 0 && v < spec_.extent[d]) m[d] = v;
        }
        next_[s * p_ + a] = index_of(m);
      }
    }
  }

  const GridSpec& spec() const noexcept { return spec_; }
  int dims() const noexcept { return spec_.dims; }
  std::size_t num_states() const noexcept { return n_; }
  std::size_t num_actions() const noexcept { return p_; }
  double gamma() const noexcept { return gamma_; }
  std::size_t stay_action() const noexcept { return (p_ - 1) / 2; }
  const Cell& offset(std::size_t action) const { return offsets_.at(action); }

  std::size_t transition(std::size_t state, std::size_t action) const {
    check_state(state);
    if (action >= p_)
      fail(ErrorCode::index_out_of_range, "action " + std::to_string(action) + " >= " + std::to_string(p_));
    return next_[state * p_ + action];
  }

  /// Row of successor states for `state`, one per action. No bounds check.
  std::span<const std::size_t> successors(std::size_t state) const {
    return {next_.data() + state * p_, p_};
  }

  Cell cell_of(std::size_t state) const {
    check_state(state);
    Cell c{0, 0, 0};
    for (int d = 0; d < spec_.dims; ++d) {
      c[d] = static_cast<int>(state % static_cast<std::size_t>(spec_.extent[d]));
      state /= static_cast<std::size_t>(spec_.extent[d]);
    }
    return c;
  }

  std::size_t index_of(const Cell& cell) const {
    std::size_t idx = 0;
    std::size_t stride = 1;
    for (int d = 0; d < spec_.dims; ++d) {
      if (cell[d] < 0 || cell[d] >= spec_.extent[d])
        fail(ErrorCode::index_out_of_range, "cell coordinate out of range on axis " + std::to_string(d));
      idx += static_cast<std::size_t>(cell[d]) * stride;
      stride *= static_cast<std::size_t>(spec_.extent[d]);
    }
    return idx;
  }

  /// Lowest-index action moving `from` to `to`, or num_actions() when the
  /// pair is not connected by a single step.
  std::size_t action_between(std::size_t from, std::size_t to) const {
    check_state(from);
    check_state(to);
    for (std::size_t a = 0; a < p_; ++a)
      if (next_[from * p_ + a] == to) return a;
    return p_;
  }

  void check_state(std::size_t state) const {
    if (state >= n_)
      fail(ErrorCode::index_out_of_range, "state " + std::to_string(state) + " >= " + std::to_string(n_));
  }

 private:
  GridSpec spec_;
  double gamma_;
  std::size_t n_ = 0;
  std::size_t p_ = 0;
  std::vector<Cell> offsets_;
  std::vector<std::size_t> next_;
};

inline GridMDP build_grid(const GridSpec& spec, double gamma) { return GridMDP(spec, gamma); }

enum class FeatureMode { one_hot, coordinates };

inline std::size_t feature_dim(const GridMDP& mdp, FeatureMode mode) {
  return mode == FeatureMode::one_hot ? mdp.num_states() : 2 * static_cast<std::size_t>(mdp.dims());
}

/// Writes phi(state | goal) into `out` (length feature_dim).
/// Coordinates mode: per-axis cell index scaled to [0,1], then the
/// goal-minus-state displacement scaled by the same span (in [-1,1]).
/// Axes of extent 1 contribute zeros.
inline void features_into(const GridMDP& mdp, std::size_t state, std::size_t goal, FeatureMode mode,
                          std::span<double> out) {
  mdp.check_state(state);
  mdp.check_state(goal);
  if (out.size() != feature_dim(mdp, mode))
    fail(ErrorCode::dimension_mismatch, "feature buffer has wrong length");
  if (mode == FeatureMode::one_hot) {
    std::fill(out.begin(), out.end(), 0.0);
    out[state] = 1.0;
    return;
  }
  const int dims = mdp.dims();
  const Cell c = mdp.cell_of(state);
  const Cell g = mdp.cell_of(goal);
  for (int d = 0; d < dims; ++d) {
    const int span = mdp.spec().extent[d] - 1;
    const double scale = span > 0 ? 1.0 / span : 0.0;
    out[d] = c[d] * scale;
    out[dims + d] = (g[d] - c[d]) * scale;
  }
}

inline std::vector<double> features(const GridMDP& mdp, std::size_t state, std::size_t goal, FeatureMode mode) {
  std::vector<double> out(feature_dim(mdp, mode));
  features_into(mdp, state, goal, mode, out);
  return out;
}

/// Row-major feature matrix for all states conditioned on one goal.
inline std::vector<double> feature_matrix(const GridMDP& mdp, std::size_t goal, FeatureMode mode) {
  const std::size_t dim = feature_dim(mdp, mode);
  std::vector<double> out(mdp.num_states() * dim);
  for (std::size_t s = 0; s < mdp.num_states(); ++s)
    features_into(mdp, s, goal, mode, std::span<double>(out.data() + s * dim, dim));
  return out;
}

/// Maps world points onto state indices. A point exactly on the upper
/// boundary belongs to the last cell. Only the first `spec.dims`
/// coordinates of each position are read.
inline std::vector<std::size_t> discretize(std::span<const Position> positions, const GridSpec& spec) {
  validate(spec);
  std::vector<std::size_t> states;
  states.reserve(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    std::size_t idx = 0;
    std::size_t stride = 1;
    for (int d = 0; d < spec.dims; ++d) {
      const double rel = (positions[i][d] - spec.origin[d]) / spec.cell_size;
      const int extent = spec.extent[d];
      if (!std::isfinite(rel) || rel < 0.0 || rel > static_cast<double>(extent))
        fail(ErrorCode::point_out_of_bounds, "point " + std::to_string(i) + " lies outside the grid on axis " +
                                                 std::to_string(d));
      int cell = static_cast<int>(std::floor(rel));
      if (cell == extent) cell = extent - 1;
      idx += static_cast<std::size_t>(cell) * stride;
      stride *= static_cast<std::size_t>(extent);
    }
    states.push_back(idx);
  }
  return states;
}

inline Position cell_center(const GridMDP& mdp, std::size_t state) {
  const Cell c = mdp.cell_of(state);
  const GridSpec& spec = mdp.spec();
  Position p{0.0, 0.0, 0.0};
  for (int d = 0; d < spec.dims; ++d) p[d] = spec.origin[d] + (c[d] + 0.5) * spec.cell_size;
  return p;
}

}  // namespace medirl
