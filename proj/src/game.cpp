#include "m3fg/game.hpp"

#include <cmath>
#include <sstream>

#include "m3fg/errors.hpp"
#include "m3fg/partition.hpp"

namespace m3fg {

bool is_distribution(std::span<const double> p, double tol) {
  if (p.empty()) return false;
  double sum = 0.0;
  for (double v : p) {
    if (!std::isfinite(v) || v < -tol || v > 1.0 + tol) return false;
    sum += v;
  }
  return std::abs(sum - 1.0) <= tol;
}

MeanField::MeanField(std::vector<double> weights) : weights_(std::move(weights)) {
  if (!is_distribution(weights_)) throw ConfigError("mean field is not a probability vector");
}

MeanField MeanField::unchecked(std::vector<double> weights) {
  MeanField mf;
  mf.weights_ = std::move(weights);
  return mf;
}

int policy_slices(const Horizon& h) {
  if (const auto* f = std::get_if<FiniteHorizon>(&h)) return f->steps;
  return 1;
}

namespace {

std::string format_row_sum(double s) {
  std::ostringstream os;
  os.precision(17);
  os << s;
  return os.str();
}

void check_row(std::vector<std::string>& out, const std::vector<double>& row, std::size_t expected_len,
               const std::string& where) {
  if (row.size() != expected_len) {
    out.push_back("row length " + std::to_string(row.size()) + " != " + std::to_string(expected_len) + " at " +
                  where);
    return;
  }
  double sum = 0.0;
  bool bad_entry = false;
  for (double v : row) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0 + kProbabilityTolerance) bad_entry = true;
    sum += v;
  }
  if (bad_entry) out.push_back("probability outside [0,1] at " + where);
  if (!(std::abs(sum - 1.0) <= kProbabilityTolerance)) {
    out.push_back("row sum " + format_row_sum(sum) + " != 1 at " + where);
  }
}

}  // namespace

std::vector<std::string> validate(const GameSpec& spec, const SimplexPartition& partition) {
  std::vector<std::string> out;
  if (spec.minor_states < 1 || spec.minor_actions < 1 || spec.major_states < 1 || spec.major_actions < 1) {
    out.push_back("state and action counts must be >= 1");
    return out;
  }
  if (partition.dim() != spec.minor_states) {
    out.push_back("partition dim " + std::to_string(partition.dim()) + " != minor state count " +
                  std::to_string(spec.minor_states));
    return out;
  }
  if (!spec.minor_kernel || !spec.major_kernel || !spec.minor_reward || !spec.major_reward) {
    out.push_back("kernel or reward function missing");
    return out;
  }
  if (spec.mu0.size() != static_cast<std::size_t>(spec.minor_states) || !is_distribution(spec.mu0.weights())) {
    out.push_back("mu0 is not a probability vector over minor states");
  }
  if (spec.mu0_major.size() != static_cast<std::size_t>(spec.major_states) || !is_distribution(spec.mu0_major)) {
    out.push_back("mu0_major is not a probability vector over major states");
  }
  if (const auto* f = std::get_if<FiniteHorizon>(&spec.horizon); f && f->steps < 1) {
    out.push_back("finite horizon must have at least one step");
  }
  if (const auto* d = std::get_if<DiscountedHorizon>(&spec.horizon); d && !(d->gamma > 0.0 && d->gamma < 1.0)) {
    out.push_back("discount factor must lie in (0,1)");
  }

  for (std::size_t c = 0; c < partition.cell_count(); ++c) {
    const MeanField& mu = partition.representative(c);
    for (int x0 = 0; x0 < spec.major_states; ++x0) {
      for (int u0 = 0; u0 < spec.major_actions; ++u0) {
        const std::string major_where =
            "(x0=" + std::to_string(x0) + ",u0=" + std::to_string(u0) + ",cell=" + std::to_string(c) + ")";
        check_row(out, spec.major_kernel(x0, u0, mu), spec.major_states, "major kernel " + major_where);
        if (!std::isfinite(spec.major_reward(x0, u0, mu))) out.push_back("non-finite major reward at " + major_where);
        for (int x = 0; x < spec.minor_states; ++x) {
          for (int u = 0; u < spec.minor_actions; ++u) {
            const std::string where = "(x=" + std::to_string(x) + ",u=" + std::to_string(u) +
                                      ",x0=" + std::to_string(x0) + ",u0=" + std::to_string(u0) +
                                      ",cell=" + std::to_string(c) + ")";
            check_row(out, spec.minor_kernel(x, u, x0, u0, mu), spec.minor_states, where);
            if (!std::isfinite(spec.minor_reward(x, u, x0, u0, mu))) out.push_back("non-finite minor reward at " + where);
          }
        }
      }
    }
  }
  return out;
}

namespace {

PolicyPair filled_policy(const GameSpec& spec, const SimplexPartition& partition, bool uniform) {
  const std::size_t slices = policy_slices(spec.horizon);
  const std::size_t cells = partition.cell_count();
  const std::size_t nx = spec.minor_states, nx0 = spec.major_states;
  const std::size_t nu = spec.minor_actions, nu0 = spec.major_actions;

  PolicyPair pair{MinorPolicy({slices, nx, nx0, cells, nu}, uniform ? 1.0 / nu : 0.0),
                  MajorPolicy({slices, nx0, cells, nu0}, uniform ? 1.0 / nu0 : 0.0)};
  if (!uniform) {
    auto& minor = pair.minor.data();
    for (std::size_t i = 0; i < minor.size(); i += nu) minor[i] = 1.0;
    auto& major = pair.major.data();
    for (std::size_t i = 0; i < major.size(); i += nu0) major[i] = 1.0;
  }
  return pair;
}

}  // namespace

PolicyPair uniform_policy(const GameSpec& spec, const SimplexPartition& partition) {
  return filled_policy(spec, partition, true);
}

PolicyPair first_action_policy(const GameSpec& spec, const SimplexPartition& partition) {
  return filled_policy(spec, partition, false);
}

void check_policy(const GameSpec& spec, const SimplexPartition& partition, const PolicyPair& pair) {
  const std::size_t slices = policy_slices(spec.horizon);
  const MinorPolicy::Shape minor_shape{slices, static_cast<std::size_t>(spec.minor_states),
                                       static_cast<std::size_t>(spec.major_states), partition.cell_count(),
                                       static_cast<std::size_t>(spec.minor_actions)};
  const MajorPolicy::Shape major_shape{slices, static_cast<std::size_t>(spec.major_states), partition.cell_count(),
                                       static_cast<std::size_t>(spec.major_actions)};
  if (pair.minor.shape() != minor_shape) throw ConfigError("minor policy table has the wrong shape");
  if (pair.major.shape() != major_shape) throw ConfigError("major policy table has the wrong shape");

  auto check_rows = [](const std::vector<double>& data, std::size_t width, const char* which) {
    for (std::size_t i = 0; i < data.size(); i += width) {
      if (!is_distribution(std::span<const double>(data.data() + i, width))) {
        throw ConfigError(std::string(which) + " policy row " + std::to_string(i / width) +
                          " is not a probability vector");
      }
    }
  };
  check_rows(pair.minor.data(), minor_shape[4], "minor");
  check_rows(pair.major.data(), major_shape[3], "major");
}

}  // namespace m3fg
