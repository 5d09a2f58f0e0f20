#include "m3fg/partition.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "m3fg/errors.hpp"

namespace m3fg {

std::size_t composition_count(int n, int k) {
  if (n < 0 || k < 1) throw ConfigError("composition_count: invalid arguments");
  // C(n + k - 1, k - 1), multiplied up incrementally; every partial product is an
  // exact binomial so the division is exact.
  const unsigned __int128 limit = std::numeric_limits<std::size_t>::max();
  unsigned __int128 c = 1;
  const std::uint64_t top = static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(k) - 1;
  const std::uint64_t r = static_cast<std::uint64_t>(k) - 1;
  for (std::uint64_t i = 1; i <= r; ++i) {
    c = c * (top - r + i) / i;
    if (c > limit) {
      throw ConfigError("partition with dim=" + std::to_string(k) + ", bins=" + std::to_string(n) +
                        " has more cells than fit in a size type");
    }
  }
  return static_cast<std::size_t>(c);
}

namespace {

void enumerate(int dim, int remaining, int pos, std::vector<int>& current, std::vector<int>& out) {
  if (pos == dim - 1) {
    current[pos] = remaining;
    out.insert(out.end(), current.begin(), current.end());
    return;
  }
  for (int k = remaining; k >= 0; --k) {
    current[pos] = k;
    enumerate(dim, remaining - k, pos + 1, current, out);
  }
}

}  // namespace

SimplexPartition::SimplexPartition(int dim, int bins) : dim_(dim), bins_(bins) {
  if (dim < 1) throw ConfigError("partition dim must be >= 1");
  if (bins < 1) throw ConfigError("partition bins must be >= 1");
  const std::size_t cells = composition_count(bins, dim);
  if (cells > compositions_.max_size() / static_cast<std::size_t>(dim)) {
    throw ConfigError("partition too large to enumerate");
  }

  suffix_counts_.assign(static_cast<std::size_t>(dim + 1) * (bins + 1), 0);
  for (int d = 1; d <= dim; ++d) {
    for (int s = 0; s <= bins; ++s) {
      suffix_counts_[static_cast<std::size_t>(d) * (bins + 1) + s] = composition_count(s, d);
    }
  }

  compositions_.reserve(cells * dim);
  std::vector<int> current(dim, 0);
  enumerate(dim, bins, 0, current, compositions_);

  representatives_.reserve(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    std::vector<double> w(dim);
    for (int i = 0; i < dim; ++i) {
      w[i] = static_cast<double>(compositions_[c * dim + i]) / bins;
    }
    representatives_.push_back(MeanField::unchecked(std::move(w)));
  }
}

SimplexPartition build_partition(int dim, int bins) { return SimplexPartition(dim, bins); }

const MeanField& SimplexPartition::representative(std::size_t cell) const {
  if (cell >= representatives_.size()) {
    throw std::out_of_range("cell index " + std::to_string(cell) + " out of range");
  }
  return representatives_[cell];
}

std::span<const int> SimplexPartition::composition(std::size_t cell) const {
  if (cell >= representatives_.size()) {
    throw std::out_of_range("cell index " + std::to_string(cell) + " out of range");
  }
  return {compositions_.data() + cell * dim_, static_cast<std::size_t>(dim_)};
}

std::size_t SimplexPartition::index_of(std::span<const int> k) const {
  if (k.size() != static_cast<std::size_t>(dim_)) throw ConfigError("composition has wrong length");
  long sum = 0;
  for (int v : k) {
    if (v < 0) throw ConfigError("composition has a negative part");
    sum += v;
  }
  if (sum != bins_) throw ConfigError("composition does not sum to bins");

  // Count the compositions preceding k in descending lexicographic order: at
  // each position, every larger leading value comes first.
  std::size_t rank = 0;
  int remaining = bins_;
  for (int pos = 0; pos + 1 < dim_; ++pos) {
    const int parts_after = dim_ - pos - 1;
    for (int larger = k[pos] + 1; larger <= remaining; ++larger) {
      rank += suffix_counts_[static_cast<std::size_t>(parts_after) * (bins_ + 1) + (remaining - larger)];
    }
    remaining -= k[pos];
  }
  return rank;
}

std::size_t SimplexPartition::project(std::span<const double> mu) const {
  if (mu.size() != static_cast<std::size_t>(dim_)) {
    throw ConfigError("mean field has length " + std::to_string(mu.size()) + ", partition expects " +
                      std::to_string(dim_));
  }
  double total = 0.0;
  for (double w : mu) {
    if (!(w >= -1e-12) || !std::isfinite(w)) throw ConfigError("mean field has a negative or non-finite entry");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("mean field does not sum to one");

  std::vector<int> k(dim_);
  std::vector<double> frac(dim_);
  int assigned = 0;
  for (int i = 0; i < dim_; ++i) {
    double scaled = std::max(0.0, mu[i]) / total * bins_;
    const double nearest = std::round(scaled);
    if (std::abs(scaled - nearest) < 1e-9) scaled = nearest;
    const double fl = std::floor(scaled);
    k[i] = static_cast<int>(fl);
    frac[i] = scaled - fl;
    assigned += k[i];
  }
  int remaining = std::clamp(bins_ - assigned, 0, dim_);

  std::vector<int> order(dim_);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return frac[a] > frac[b]; });
  for (int j = 0; j < remaining; ++j) ++k[order[j]];

  // Guard against rounding pushing the sum past bins (only possible for inputs
  // at the edge of the sum tolerance): take the excess from the largest parts.
  int sum = std::accumulate(k.begin(), k.end(), 0);
  while (sum > bins_) {
    auto it = std::max_element(k.begin(), k.end());
    --*it;
    --sum;
  }
  return index_of(k);
}

double SimplexPartition::projection_bound() const {
  return dim_ == 2 ? 1.0 / bins_ : static_cast<double>(dim_) / bins_;
}

}  // namespace m3fg
