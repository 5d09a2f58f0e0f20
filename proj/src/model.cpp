#include "m3fg/model.hpp"

#include <cmath>
#include <string>

#include "m3fg/dynamics.hpp"
#include "m3fg/errors.hpp"

namespace m3fg {

namespace {

void store_row(std::span<double> dst, const std::vector<double>& row, const std::string& where) {
  if (row.size() != dst.size()) throw NumericError("kernel row of wrong length at " + where);
  double sum = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (!std::isfinite(row[i]) || row[i] < 0.0) throw NumericError("negative kernel entry at " + where);
    dst[i] = row[i];
    sum += row[i];
  }
  if (std::abs(sum - 1.0) > 1e-9) throw NumericError("kernel row does not sum to one at " + where);
}

}  // namespace

GridModel::GridModel(GameSpec spec, SimplexPartition partition)
    : spec_(std::move(spec)), partition_(std::move(partition)) {
  if (partition_.dim() != spec_.minor_states) throw ConfigError("partition dim does not match minor state count");
  if (spec_.mu0.size() != static_cast<std::size_t>(spec_.minor_states)) throw ConfigError("mu0 has wrong length");
  if (spec_.mu0_major.size() != static_cast<std::size_t>(spec_.major_states)) {
    throw ConfigError("mu0_major has wrong length");
  }
  if (policy_slices(spec_.horizon) < 1) throw ConfigError("horizon must have at least one step");
  if (const auto* d = std::get_if<DiscountedHorizon>(&spec_.horizon); d && !(d->gamma > 0.0 && d->gamma < 1.0)) {
    throw ConfigError("gamma must lie in (0,1)");
  }
  initial_cell_ = partition_.project(spec_.mu0);

  const std::size_t nx = spec_.minor_states, nu = spec_.minor_actions;
  const std::size_t nx0 = spec_.major_states, nu0 = spec_.major_actions;
  const std::size_t nc = partition_.cell_count();
  minor_kernel_ = Tensor<6>({nx, nu, nx0, nu0, nc, nx});
  major_kernel_ = Tensor<4>({nx0, nu0, nc, nx0});
  minor_reward_ = Tensor<5>({nx, nu, nx0, nu0, nc});
  major_reward_ = Tensor<3>({nx0, nu0, nc});

  for (std::size_t c = 0; c < nc; ++c) {
    const MeanField& mu = partition_.representative(c);
    for (int x0 = 0; x0 < spec_.major_states; ++x0) {
      for (int u0 = 0; u0 < spec_.major_actions; ++u0) {
        const std::string major_where =
            "(x0=" + std::to_string(x0) + ",u0=" + std::to_string(u0) + ",cell=" + std::to_string(c) + ")";
        store_row(major_kernel_.row(x0, u0, c), spec_.major_kernel(x0, u0, mu), major_where);
        major_reward_(x0, u0, c) = spec_.major_reward(x0, u0, mu);
        for (int x = 0; x < spec_.minor_states; ++x) {
          for (int u = 0; u < spec_.minor_actions; ++u) {
            store_row(minor_kernel_.row(x, u, x0, u0, c), spec_.minor_kernel(x, u, x0, u0, mu),
                      "(x=" + std::to_string(x) + ",u=" + std::to_string(u) + "," + major_where.substr(1));
            minor_reward_(x, u, x0, u0, c) = spec_.minor_reward(x, u, x0, u0, mu);
          }
        }
      }
    }
  }
}

MeanFieldFlow::MeanFieldFlow(const GridModel& model, const MinorPolicy& policy)
    : slices_(policy.extent(0)),
      nx0_(model.major_states()),
      nu0_(model.major_actions()),
      cells_(model.cells()) {
  if (policy.extent(1) != static_cast<std::size_t>(model.minor_states()) || policy.extent(2) != nx0_ ||
      policy.extent(3) != cells_ || policy.extent(4) != static_cast<std::size_t>(model.minor_actions())) {
    throw ConfigError("minor policy shape does not match the model");
  }
  next_.resize(slices_ * nx0_ * nu0_ * cells_);
  std::vector<double> mu_next(model.minor_states());
  for (std::size_t s = 0; s < slices_; ++s) {
    for (std::size_t x0 = 0; x0 < nx0_; ++x0) {
      for (std::size_t u0 = 0; u0 < nu0_; ++u0) {
        for (std::size_t c = 0; c < cells_; ++c) {
          detail::accumulate_mean_field(
              model.partition().representative(c).weights(), model.minor_actions(),
              [&](int x, int u) { return model.minor_kernel(x, u, x0, u0, c); },
              [&](int x) { return policy.row(s, x, x0, c); }, mu_next);
          next_[((s * nx0_ + x0) * nu0_ + u0) * cells_ + c] = model.partition().project(mu_next);
        }
      }
    }
  }
}

}  // namespace m3fg
