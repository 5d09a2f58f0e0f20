#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "m3fg/game.hpp"
#include "m3fg/partition.hpp"

namespace m3fg {

/// One application of the mean-field transition operator.
struct MfTransitionInput {
  int x0 = 0;
  int u0 = 0;
  MeanField mu;
  /// policy[x] is the action distribution of minor players in state x.
  std::vector<std::vector<double>> policy;
};

struct MajorStep {
  int x0 = 0;
  int u0 = 0;
};

namespace detail {

/// mu'(x') = sum_x sum_u P(x' | x, u) pi(u | x) mu(x), states outer and actions
/// inner. Shared by the grid and off-grid steps.
template <class KernelRow, class PolicyRow>
void accumulate_mean_field(std::span<const double> mu, int actions, KernelRow&& kernel_row, PolicyRow&& policy_row,
                           std::span<double> out) {
  for (double& v : out) v = 0.0;
  for (std::size_t x = 0; x < mu.size(); ++x) {
    if (mu[x] == 0.0) continue;
    const auto pi = policy_row(static_cast<int>(x));
    for (int u = 0; u < actions; ++u) {
      const double w = mu[x] * pi[u];
      if (w == 0.0) continue;
      const auto p = kernel_row(static_cast<int>(x), u);
      for (std::size_t xn = 0; xn < out.size(); ++xn) out[xn] += w * p[xn];
    }
  }
}

}  // namespace detail

/// Throws NumericError if a kernel row does not sum to one within 1e-9.
MeanField mean_field_step(const GameSpec& spec, const MfTransitionInput& input);

/// Projected transition on the grid: project(T(x0, u0, representative(cell))).
std::size_t projected_mean_field_step(const GameSpec& spec, const SimplexPartition& partition, int x0, int u0,
                                      std::size_t cell, const MinorPolicy& policy, int t);

/// Cells visited along a major trajectory, starting from project(mu0). The
/// result has trajectory.size() + 1 entries.
std::vector<std::size_t> rollout_mean_field(const GameSpec& spec, const SimplexPartition& partition,
                                            const MinorPolicy& policy, std::span<const MajorStep> trajectory);

}  // namespace m3fg
