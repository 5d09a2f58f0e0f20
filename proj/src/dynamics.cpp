#include "m3fg/dynamics.hpp"

#include <cmath>
#include <string>

#include "m3fg/errors.hpp"

namespace m3fg {

namespace {

void require_row(const std::vector<double>& row, std::size_t len, int x, int u, int x0, int u0) {
  double sum = 0.0;
  bool ok = row.size() == len;
  for (double v : row) {
    ok = ok && std::isfinite(v) && v >= 0.0;
    sum += v;
  }
  if (!ok || std::abs(sum - 1.0) > 1e-9) {
    throw NumericError("invalid minor kernel row at (x=" + std::to_string(x) + ",u=" + std::to_string(u) +
                       ",x0=" + std::to_string(x0) + ",u0=" + std::to_string(u0) + ")");
  }
}

MfTransitionInput slice_input(const GameSpec& spec, int x0, int u0, const MeanField& mu, const MinorPolicy& policy,
                              int t, std::size_t cell) {
  MfTransitionInput in{x0, u0, mu, {}};
  const std::size_t s = slice_at(policy, t);
  in.policy.reserve(spec.minor_states);
  for (int x = 0; x < spec.minor_states; ++x) {
    auto row = policy.row(s, x, x0, cell);
    in.policy.emplace_back(row.begin(), row.end());
  }
  return in;
}

}  // namespace

MeanField mean_field_step(const GameSpec& spec, const MfTransitionInput& in) {
  if (in.mu.size() != static_cast<std::size_t>(spec.minor_states) ||
      in.policy.size() != static_cast<std::size_t>(spec.minor_states)) {
    throw ConfigError("mean_field_step: dimension mismatch");
  }
  if (in.x0 < 0 || in.x0 >= spec.major_states || in.u0 < 0 || in.u0 >= spec.major_actions) {
    throw ConfigError("mean_field_step: major state or action out of range");
  }
  for (const auto& row : in.policy) {
    if (row.size() != static_cast<std::size_t>(spec.minor_actions) || !is_distribution(row)) {
      throw ConfigError("mean_field_step: policy row is not a distribution over actions");
    }
  }
  std::vector<double> next(spec.minor_states);
  std::vector<double> kernel_row;
  detail::accumulate_mean_field(
      in.mu.weights(), spec.minor_actions,
      [&](int x, int u) -> std::span<const double> {
        kernel_row = spec.minor_kernel(x, u, in.x0, in.u0, in.mu);
        require_row(kernel_row, spec.minor_states, x, u, in.x0, in.u0);
        return kernel_row;
      },
      [&](int x) -> std::span<const double> { return in.policy[x]; }, next);
  return MeanField::unchecked(std::move(next));
}

std::size_t projected_mean_field_step(const GameSpec& spec, const SimplexPartition& partition, int x0, int u0,
                                      std::size_t cell, const MinorPolicy& policy, int t) {
  const MeanField& mu = partition.representative(cell);
  return partition.project(mean_field_step(spec, slice_input(spec, x0, u0, mu, policy, t, cell)));
}

std::vector<std::size_t> rollout_mean_field(const GameSpec& spec, const SimplexPartition& partition,
                                            const MinorPolicy& policy, std::span<const MajorStep> trajectory) {
  if (const auto* f = std::get_if<FiniteHorizon>(&spec.horizon);
      f && trajectory.size() > static_cast<std::size_t>(f->steps)) {
    throw ConfigError("major trajectory is longer than the horizon");
  }
  std::vector<std::size_t> cells{partition.project(spec.mu0)};
  for (std::size_t t = 0; t < trajectory.size(); ++t) {
    cells.push_back(projected_mean_field_step(spec, partition, trajectory[t].x0, trajectory[t].u0, cells.back(),
                                              policy, static_cast<int>(t)));
  }
  return cells;
}

}  // namespace m3fg
