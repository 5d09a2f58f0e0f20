#pragma once

#include <array>
#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace m3fg {

/// Dense row-major table of doubles with a fixed rank.
///
/// The tag parameter keeps semantically different tables (policies, action
/// values, state values) from being mixed up even when their ranks agree.
template <std::size_t Rank, class Tag = void>
class Tensor {
  static_assert(Rank >= 1);

 public:
  using Shape = std::array<std::size_t, Rank>;

  Tensor() { shape_.fill(0); }

  explicit Tensor(const Shape& shape, double fill = 0.0) : shape_(shape) {
    std::size_t n = 1;
    for (auto s : shape_) n *= s;
    data_.assign(n, fill);
  }

  const Shape& shape() const { return shape_; }
  std::size_t extent(std::size_t axis) const { return shape_[axis]; }
  std::size_t size() const { return data_.size(); }

  template <class... I>
  double& operator()(I... idx) {
    static_assert(sizeof...(I) == Rank);
    return data_[offset({static_cast<std::size_t>(idx)...})];
  }

  template <class... I>
  double operator()(I... idx) const {
    static_assert(sizeof...(I) == Rank);
    return data_[offset({static_cast<std::size_t>(idx)...})];
  }

  /// Contiguous slice over the last axis.
  template <class... I>
  std::span<double> row(I... idx) {
    static_assert(sizeof...(I) == Rank - 1);
    return {data_.data() + row_offset({static_cast<std::size_t>(idx)...}), shape_[Rank - 1]};
  }

  template <class... I>
  std::span<const double> row(I... idx) const {
    static_assert(sizeof...(I) == Rank - 1);
    return {data_.data() + row_offset({static_cast<std::size_t>(idx)...}), shape_[Rank - 1]};
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  std::size_t offset(const std::array<std::size_t, Rank>& idx) const {
    std::size_t off = 0;
    for (std::size_t k = 0; k < Rank; ++k) {
      assert(idx[k] < shape_[k]);
      off = off * shape_[k] + idx[k];
    }
    return off;
  }

  std::size_t row_offset(const std::array<std::size_t, Rank - 1>& idx) const {
    std::size_t off = 0;
    for (std::size_t k = 0; k + 1 < Rank; ++k) {
      assert(idx[k] < shape_[k]);
      off = off * shape_[k] + idx[k];
    }
    return off * shape_[Rank - 1];
  }

  Shape shape_;
  std::vector<double> data_;
};

}  // namespace m3fg
