#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "m3fg/game.hpp"
#include "m3fg/model.hpp"

namespace m3fg {

struct SimConfig {
  int n_players = 100;
  int episodes = 1000;
  std::uint64_t seed = 0;
  /// Required for discounted games (truncation length); optional otherwise.
  std::optional<int> horizon_steps;
  /// Worker threads for episodes; 0 picks the hardware concurrency. Results
  /// do not depend on this value.
  int threads = 0;
  /// Stream id per player (defaults to 0..N-1). Permuting it reassigns the
  /// random streams without changing the law of the system.
  std::vector<std::uint64_t> player_streams;
};

struct SimResult {
  double minor_mean = 0.0;  // per-player return averaged over players and episodes
  double minor_ci = 0.0;    // 95% normal half-width over episode means
  double major_mean = 0.0;
  double major_ci = 0.0;
  int episodes = 0;
  int n_players = 0;
};

struct DeviationGain {
  double gain = 0.0;  // J_N^1(deviation) - J_N^1(pair), paired episodes
  double ci = 0.0;
  int episodes = 0;
  int n_players = 0;
};

struct EpisodeOutcome {
  double minor_mean_return = 0.0;  // average over all players
  double first_player_return = 0.0;
  double major_return = 0.0;
};

/// Observer of the empirical state counts at each step of an episode.
using StepObserver = std::function<void(int t, std::span<const int> counts, int x0)>;

/// Independent 64-bit seed for (episode, stream); the major player uses
/// kMajorStream so its draws do not depend on N. The mix is
/// splitmix64(master ^ splitmix64(episode ^ splitmix64(stream))).
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t episode, std::uint64_t stream);
inline constexpr std::uint64_t kMajorStream = ~std::uint64_t{0};

/// One episode of the N-player system. Player 0 follows `deviation` when given.
/// Policies are looked up at the projected empirical mean field; kernels and
/// rewards see the raw empirical mean field. Throws NumericError if a kernel
/// row off the grid is not a distribution within 1e-9.
EpisodeOutcome run_episode(const GridModel& model, const PolicyPair& pair, const MinorPolicy* deviation,
                           const SimConfig& config, int episode, const StepObserver& observer = {});

SimResult simulate(const GridModel& model, const PolicyPair& pair, const SimConfig& config);

/// Gain of player 0 switching to `deviation`, estimated with common random
/// numbers against the undeviated system.
DeviationGain deviation_gain(const GridModel& model, const PolicyPair& pair, const MinorPolicy& deviation,
                             const SimConfig& config);

/// Mean and 95% normal-approximation half-width of a sample.
std::pair<double, double> mean_and_ci(std::span<const double> samples);

}  // namespace m3fg
