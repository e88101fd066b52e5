#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "claimrev/error.hpp"

namespace claimrev {

/// Dense row-major matrix of 32-bit features, one row per instance.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0f) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  std::span<float> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const float> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  float& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  float operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  void append_row(std::span<const float> values) {
    if (rows_ == 0 && data_.empty()) cols_ = values.size();
    if (values.size() != cols_) throw ValidationError("row width does not match matrix width");
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
  }

  /// New matrix holding the given rows, in the given order.
  FeatureMatrix select(std::span<const std::size_t> indices) const {
    FeatureMatrix out(indices.size(), cols_);
    for (std::size_t k = 0; k < indices.size(); ++k) {
      auto src = row(indices[k]);
      std::copy(src.begin(), src.end(), out.row(k).begin());
    }
    return out;
  }

  bool operator==(const FeatureMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> data_;
};

}  // namespace claimrev
