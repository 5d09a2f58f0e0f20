#pragma once

#include <cstddef>

#include "m3fg/game.hpp"
#include "m3fg/model.hpp"
#include "m3fg/tensor.hpp"

namespace m3fg {

struct MinorQTag;
struct MajorQTag;
struct MinorValueTag;
struct MajorValueTag;

/// Q(t, x, u, x0, cell), indexed [slice][x][u][x0][cell].
using MinorQ = Tensor<5, MinorQTag>;
/// Q0(t, x0, u0, cell), indexed [slice][x0][u0][cell].
using MajorQ = Tensor<4, MajorQTag>;
/// V(t, x, x0, cell), indexed [slice][x][x0][cell].
using MinorValues = Tensor<4, MinorValueTag>;
/// V0(t, x0, cell), indexed [slice][x0][cell].
using MajorValues = Tensor<3, MajorValueTag>;

/// Stopping rule for discounted problems; ignored for finite horizons, which
/// are solved exactly by backward induction.
struct DpOptions {
  double tolerance = 1e-5;                 // max TD error over all states
  std::size_t max_iterations = 100000;
};

/// Stopping rule used when computing exploitability.
inline constexpr DpOptions kExploitabilityOptions{1e-12, 100000};

struct IterationStats {
  std::size_t iterations = 0;
  double residual = 0.0;
};

struct MinorBestResponse {
  MinorQ q;
  MinorPolicy policy;  // greedy, ties to the lowest action
  MinorValues values;  // max_u q
  double objective = 0.0;
  IterationStats stats;
};

struct MajorBestResponse {
  MajorQ q;
  MajorPolicy policy;
  MajorValues values;
  double objective = 0.0;
  IterationStats stats;
};

struct MinorEvaluation {
  MinorValues values;
  double objective = 0.0;
  IterationStats stats;
};

struct MajorEvaluation {
  MajorValues values;
  double objective = 0.0;
  IterationStats stats;
};

struct Objectives {
  double minor = 0.0;
  double major = 0.0;
};

struct Exploitability {
  double minor = 0.0;
  double major = 0.0;
  double total = 0.0;
};

/// Best response of a representative minor player against the pair; the mean
/// field follows pair.minor. Throws NumericError when value iteration hits the
/// iteration cap.
MinorBestResponse minor_best_response(const GridModel& model, const PolicyPair& pair, const DpOptions& opts = {});

/// Best response of the major player; the mean field follows pair.minor.
MajorBestResponse major_best_response(const GridModel& model, const PolicyPair& pair, const DpOptions& opts = {});

/// Value of a minor player using `deviation` (pair.minor when null) while the
/// population follows pair.minor.
MinorEvaluation evaluate_minor(const GridModel& model, const PolicyPair& pair, const MinorPolicy* deviation = nullptr,
                               const DpOptions& opts = {});

/// Value of the major player using `deviation` (pair.major when null).
MajorEvaluation evaluate_major(const GridModel& model, const PolicyPair& pair, const MajorPolicy* deviation = nullptr,
                               const DpOptions& opts = {});

Objectives evaluate(const GridModel& model, const PolicyPair& pair, const DpOptions& opts = {});

/// Gains available to a unilaterally deviating minor and major player.
Exploitability exploitability(const GridModel& model, const PolicyPair& pair,
                              const DpOptions& opts = kExploitabilityOptions);

}  // namespace m3fg
