#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "twk/prf.hpp"
#include "twk/tensor.hpp"

namespace twk {

/// Watermark embedding parameters. Defaults follow the main configuration:
/// two bit levels (a sign watermark) and interval length two.
struct EmbedParams {
  std::size_t bit_levels = 2;  // L
  std::size_t interval = 2;    // H
  std::size_t window = 0;      // W
  std::size_t features = 0;    // F
  WatermarkKey key;

  void validate() const;
};

/// W x F matrix of integer seeds in {0..L-1} with interval structure.
/// Timestep indices in the public API are 1-based so that interval starts
/// sit at w = k*H + 1; storage is 0-based.
class SeedMatrix {
 public:
  SeedMatrix() = default;
  SeedMatrix(std::size_t window, std::size_t features, std::size_t bit_levels,
             std::size_t interval);

  std::size_t window() const { return window_; }
  std::size_t features() const { return features_; }
  std::size_t bitLevels() const { return bit_levels_; }
  std::size_t interval() const { return interval_; }
  /// Number of intervals, n = floor(W/H). Trailing timesteps beyond n*H
  /// belong to the last started interval.
  std::size_t intervals() const { return window_ / interval_; }

  std::uint32_t at(std::size_t w0, std::size_t f0) const {
    return seeds_[w0 * features_ + f0];
  }
  std::uint32_t& at(std::size_t w0, std::size_t f0) {
    return seeds_[w0 * features_ + f0];
  }
  std::span<const std::uint32_t> row(std::size_t w0) const {
    return {seeds_.data() + w0 * features_, features_};
  }
  std::span<std::uint32_t> row(std::size_t w0) {
    return {seeds_.data() + w0 * features_, features_};
  }

  /// True when 1-based timestep w begins an interval (w = k*H+1, k < n).
  bool isIntervalStart(std::size_t w1) const;
  /// The valid comparison set W*: all 1-based timesteps that are not
  /// interval starts. Empty when H = 1.
  std::vector<std::size_t> validTimesteps() const;

  bool operator==(const SeedMatrix& other) const = default;

 private:
  std::size_t window_ = 0;
  std::size_t features_ = 0;
  std::size_t bit_levels_ = 2;
  std::size_t interval_ = 1;
  std::vector<std::uint32_t> seeds_;
};

/// The temporal chained hash: a keyed feature-order permutation of the
/// previous timestep's seed row. Multiset-preserving by construction.
/// `w` is the 1-based timestep being derived.
std::vector<std::uint32_t> chain_hash(const WatermarkKey& key, std::size_t w,
                                      std::span<const std::uint32_t> prev);

/// Fresh uniform seed rows at interval starts, chained rows elsewhere.
SeedMatrix generate_seeds(const EmbedParams& params);

/// Permutes each feature column along the temporal axis with its own keyed
/// permutation.
SeedMatrix temporal_shuffle(const SeedMatrix& seeds, const WatermarkKey& key);

/// Maps seeds to an initial Gaussian noise sample via the quantile strata
/// x[w,f] = Phi^-1((u + s[w,f]) / L) with u drawn per entry.
SeriesTensor construct_noise(const SeedMatrix& seeds, const WatermarkKey& key,
                             std::uint64_t batch_tag);

/// Full embedding: generate, shuffle, and construct a batch of watermarked
/// initial noises. Returns the pre-shuffle seed matrix (kept for informed
/// detection); all batch entries share it.
std::pair<SeriesTensor, SeedMatrix> embed(const EmbedParams& params,
                                          std::size_t batch);

}  // namespace twk
