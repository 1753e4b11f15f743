#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "twk/tensor.hpp"

namespace twk {

enum class Normalization { none, minmax, zscore };

/// CSV parse failure carrying the 1-based row/column location in the message.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An R x F table of real values with per-feature normalization state.
/// Normalization statistics are recorded at fit time so that
/// denormalize(normalize(x)) restores the original values.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<std::string> names, std::vector<double> values);

  /// Header row required; every cell must parse as a number.
  static Dataset loadCsv(const std::string& path);

  std::size_t rows() const { return names_.empty() ? 0 : values_.size() / names_.size(); }
  std::size_t features() const { return names_.size(); }
  const std::vector<std::string>& featureNames() const { return names_; }
  double at(std::size_t r, std::size_t c) const { return values_[r * features() + c]; }
  double& at(std::size_t r, std::size_t c) { return values_[r * features() + c]; }

  Normalization normalization() const { return norm_; }
  /// value' = (value - offset[f]) / scale[f]; min-max maps to [0,1].
  void normalize(Normalization kind);
  void denormalize();

 private:
  std::vector<std::string> names_;
  std::vector<double> values_;
  Normalization norm_ = Normalization::none;
  std::vector<double> offsets_;
  std::vector<double> scales_;
};

/// Sliding windows over the rows, order-preserving:
/// B = floor((R - W) / stride) + 1.
SeriesTensor window(const Dataset& ds, std::size_t W, std::size_t stride);

/// TWK1 binary tensor format: magic "TWK1", u32 version = 1, u32 B, u32 W,
/// u32 F, then B*W*F little-endian f64 values row-major with b outermost.
/// Writes are atomic (temp file + rename).
void save_tensor(const SeriesTensor& x, const std::string& path);
SeriesTensor load_tensor(const std::string& path);

/// Atomic text write (temp file + rename).
void write_text_file(const std::string& path, const std::string& content);

}  // namespace twk
