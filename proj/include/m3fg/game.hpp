#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "m3fg/tensor.hpp"

namespace m3fg {

class SimplexPartition;

/// Tolerance used for every "is this a probability vector" check on stored data.
inline constexpr double kProbabilityTolerance = 1e-12;

/// True if `p` is entrywise in [0, 1] and sums to one within `tol`.
bool is_distribution(std::span<const double> p, double tol = kProbabilityTolerance);

/// Distribution of the minor population over minor states.
class MeanField {
 public:
  MeanField() = default;

  /// Throws ConfigError unless `weights` is a probability vector (within 1e-12).
  explicit MeanField(std::vector<double> weights);

  /// Skips validation; used for intermediate results that are checked by the caller.
  static MeanField unchecked(std::vector<double> weights);

  std::size_t size() const { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  std::span<const double> weights() const { return weights_; }

  friend bool operator==(const MeanField&, const MeanField&) = default;

 private:
  std::vector<double> weights_;
};

struct FiniteHorizon {
  int steps = 1;
};

struct DiscountedHorizon {
  double gamma = 0.9;
};

/// Finite horizons sum undiscounted rewards over `steps`; discounted horizons
/// use stationary policies and geometric weighting.
using Horizon = std::variant<FiniteHorizon, DiscountedHorizon>;

inline bool is_discounted(const Horizon& h) { return std::holds_alternative<DiscountedHorizon>(h); }

/// Number of policy time slices: T for finite horizons, 1 (stationary) otherwise.
int policy_slices(const Horizon& h);

using MinorKernel =
    std::function<std::vector<double>(int x, int u, int x0, int u0, const MeanField& mu)>;
using MajorKernel = std::function<std::vector<double>(int x0, int u0, const MeanField& mu)>;
using MinorReward = std::function<double(int x, int u, int x0, int u0, const MeanField& mu)>;
using MajorReward = std::function<double(int x0, int u0, const MeanField& mu)>;

/// A finite major-minor mean-field game. Kernels and rewards are
/// time-homogeneous and must be reentrant.
struct GameSpec {
  std::string name;
  int minor_states = 1;
  int minor_actions = 1;
  int major_states = 1;
  int major_actions = 1;

  MinorKernel minor_kernel;
  MajorKernel major_kernel;
  MinorReward minor_reward;
  MajorReward major_reward;

  MeanField mu0;
  std::vector<double> mu0_major;

  Horizon horizon = FiniteHorizon{};
};

struct MinorPolicyTag;
struct MajorPolicyTag;

/// pi_t(u | x, x0, cell), indexed [slice][x][x0][cell][u].
using MinorPolicy = Tensor<5, MinorPolicyTag>;
/// pi0_t(u0 | x0, cell), indexed [slice][x0][cell][u0].
using MajorPolicy = Tensor<4, MajorPolicyTag>;

struct PolicyPair {
  MinorPolicy minor;
  MajorPolicy major;

  friend bool operator==(const PolicyPair&, const PolicyPair&) = default;
};

/// Maps a time step onto a policy slice (stationary tables have a single slice).
template <std::size_t R, class Tag>
std::size_t slice_at(const Tensor<R, Tag>& policy, int t) {
  return policy.extent(0) == 1 ? 0 : static_cast<std::size_t>(t);
}

/// Returns every violation found; an empty list means the game is valid on
/// the partition's grid.
std::vector<std::string> validate(const GameSpec& spec, const SimplexPartition& partition);

PolicyPair uniform_policy(const GameSpec& spec, const SimplexPartition& partition);
PolicyPair first_action_policy(const GameSpec& spec, const SimplexPartition& partition);

/// Throws ConfigError if the tables do not match the game and partition or hold
/// rows that are not distributions.
void check_policy(const GameSpec& spec, const SimplexPartition& partition, const PolicyPair& pair);

}  // namespace m3fg
