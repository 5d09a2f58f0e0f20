#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "m3fg/game.hpp"

namespace m3fg {

/// Fixed-denominator grid on the probability simplex.
///
/// Cells are indexed by the compositions k of `bins` into `dim` nonnegative
/// parts, in descending lexicographic order, so (M, 0, ..., 0) is cell 0.
/// The representative of a cell is k / M, and projection uses
/// largest-remainder rounding of M * mu (ties go to the lowest coordinate).
///
/// Every coordinate moves by less than 1/M under projection, so the L1
/// distance to the representative is below dim/M; for dim = 2 rounding is to
/// the nearest grid point and the distance is at most 1/M.
class SimplexPartition {
 public:
  /// Throws ConfigError if dim or bins is below one or the cell count
  /// overflows std::size_t.
  SimplexPartition(int dim, int bins);

  int dim() const { return dim_; }
  int bins() const { return bins_; }
  std::size_t cell_count() const { return representatives_.size(); }

  /// Throws ConfigError if `mu` has the wrong length or is not a distribution.
  std::size_t project(std::span<const double> mu) const;
  std::size_t project(const MeanField& mu) const { return project(mu.weights()); }

  /// Throws std::out_of_range for indices past cell_count().
  const MeanField& representative(std::size_t cell) const;
  std::span<const int> composition(std::size_t cell) const;

  /// Index of an integer composition of bins(); throws ConfigError if it is not one.
  std::size_t index_of(std::span<const int> composition) const;

  /// Upper bound on the L1 distance between a measure and its representative.
  double projection_bound() const;

  friend bool operator==(const SimplexPartition& a, const SimplexPartition& b) {
    return a.dim_ == b.dim_ && a.bins_ == b.bins_;
  }

 private:
  int dim_;
  int bins_;
  std::vector<int> compositions_;  // cell_count x dim
  std::vector<MeanField> representatives_;
  // suffix_counts_[d * (bins + 1) + s]: compositions of s into d parts.
  std::vector<std::size_t> suffix_counts_;
};

SimplexPartition build_partition(int dim, int bins);

/// C(n + k - 1, k - 1) compositions of n into k parts; throws ConfigError on overflow.
std::size_t composition_count(int n, int k);

}  // namespace m3fg
