#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace twk {

/// Batch of multivariate time-series windows, stored row-major as
/// (batch, window, features). The shape is fixed at construction;
/// element-wise operations never change it.
class SeriesTensor {
 public:
  SeriesTensor() = default;
  SeriesTensor(std::size_t batch, std::size_t window, std::size_t features);
  SeriesTensor(std::size_t batch, std::size_t window, std::size_t features,
               std::vector<double> data);

  std::size_t batch() const { return batch_; }
  std::size_t window() const { return window_; }
  std::size_t features() const { return features_; }
  /// Elements per batch sample (window * features).
  std::size_t sampleSize() const { return window_ * features_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double at(std::size_t b, std::size_t w, std::size_t f) const {
    return data_[(b * window_ + w) * features_ + f];
  }
  double& at(std::size_t b, std::size_t w, std::size_t f) {
    return data_[(b * window_ + w) * features_ + f];
  }

  std::span<const double> flat() const { return data_; }
  std::span<double> flat() { return data_; }
  std::span<const double> sample(std::size_t b) const {
    return {data_.data() + b * sampleSize(), sampleSize()};
  }
  std::span<double> sample(std::size_t b) {
    return {data_.data() + b * sampleSize(), sampleSize()};
  }

  /// Copy of one batch entry as a 1 x W x F tensor.
  SeriesTensor slice(std::size_t b) const;

  bool sameShape(const SeriesTensor& other) const {
    return batch_ == other.batch_ && window_ == other.window_ &&
           features_ == other.features_;
  }

  /// Throws std::runtime_error naming `context` if any element is NaN or Inf.
  void requireFinite(const std::string& context) const;

 private:
  std::size_t batch_ = 0;
  std::size_t window_ = 0;
  std::size_t features_ = 0;
  std::vector<double> data_;
};

}  // namespace twk
