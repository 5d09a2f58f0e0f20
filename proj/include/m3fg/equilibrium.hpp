#pragma once

#include <functional>
#include <string>
#include <vector>

#include "m3fg/dp.hpp"
#include "m3fg/game.hpp"
#include "m3fg/model.hpp"

namespace m3fg {

struct IterationRecord {
  int iteration = 0;
  Exploitability exploitability;
  double wall_seconds = 0.0;  // cumulative since the solver started
};

struct SolveReport {
  std::string solver;  // "fp" or "fpi"
  std::vector<IterationRecord> history;
  PolicyPair policy;  // final (averaged, for fp) pair
  int bins = 0;
  std::string env;
  Horizon horizon;
};

struct SolveOptions {
  int iterations = 100;
  /// Exploitability is recorded at iteration 0, every `eval_stride` iterations
  /// and at the last iteration.
  int eval_stride = 1;
  DpOptions best_response;
  DpOptions evaluation = kExploitabilityOptions;
  /// Called after every update with (n + 1, best-response pair, new iterate).
  std::function<void(int, const PolicyPair&, const PolicyPair&)> on_iteration;
};

/// pi_bar <- pi_bar + w * (pi - pi_bar), entrywise. With w = 1/(n+1) this is the
/// fictitious-play average, and a best response equal to the average leaves it
/// unchanged bit for bit.
void blend_into(PolicyPair& average, const PolicyPair& best_response, double weight);

/// Projected fictitious play: best responses against the running average,
/// averaged with weights n/(n+1) and 1/(n+1).
SolveReport fictitious_play(const GridModel& model, PolicyPair init, const SolveOptions& opts);

/// Fixed-point iteration: the iterate is replaced by its best responses.
SolveReport fixed_point_iteration(const GridModel& model, PolicyPair init, const SolveOptions& opts);

}  // namespace m3fg
