#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "m3fg/game.hpp"
#include "m3fg/partition.hpp"

namespace m3fg {

/// Discretized game: kernels and rewards of a GameSpec tabulated once at every
/// grid representative of a partition. Owns copies of both.
class GridModel {
 public:
  /// Throws NumericError if a tabulated kernel row is not a distribution
  /// (within 1e-9) and ConfigError on dimension mismatches.
  GridModel(GameSpec spec, SimplexPartition partition);

  const GameSpec& spec() const { return spec_; }
  const SimplexPartition& partition() const { return partition_; }

  int minor_states() const { return spec_.minor_states; }
  int minor_actions() const { return spec_.minor_actions; }
  int major_states() const { return spec_.major_states; }
  int major_actions() const { return spec_.major_actions; }
  std::size_t cells() const { return partition_.cell_count(); }
  int slices() const { return policy_slices(spec_.horizon); }
  std::size_t initial_cell() const { return initial_cell_; }

  std::span<const double> minor_kernel(int x, int u, int x0, int u0, std::size_t c) const {
    return minor_kernel_.row(x, u, x0, u0, c);
  }
  std::span<const double> major_kernel(int x0, int u0, std::size_t c) const { return major_kernel_.row(x0, u0, c); }
  double minor_reward(int x, int u, int x0, int u0, std::size_t c) const { return minor_reward_(x, u, x0, u0, c); }
  double major_reward(int x0, int u0, std::size_t c) const { return major_reward_(x0, u0, c); }

 private:
  GameSpec spec_;
  SimplexPartition partition_;
  std::size_t initial_cell_ = 0;
  Tensor<6> minor_kernel_;  // [x][u][x0][u0][cell][x']
  Tensor<4> major_kernel_;  // [x0][u0][cell][x0']
  Tensor<5> minor_reward_;  // [x][u][x0][u0][cell]
  Tensor<3> major_reward_;  // [x0][u0][cell]
};

/// Next-cell table of the projected mean-field flow induced by a minor
/// policy, indexed [slice][x0][u0][cell].
class MeanFieldFlow {
 public:
  MeanFieldFlow(const GridModel& model, const MinorPolicy& policy);

  std::size_t next(int t, int x0, int u0, std::size_t cell) const {
    const std::size_t s = slices_ == 1 ? 0 : static_cast<std::size_t>(t);
    return next_[((s * nx0_ + x0) * nu0_ + u0) * cells_ + cell];
  }

 private:
  std::size_t slices_, nx0_, nu0_, cells_;
  std::vector<std::size_t> next_;
};

}  // namespace m3fg
