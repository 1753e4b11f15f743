#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "twk/estimator.hpp"
#include "twk/sampler.hpp"
#include "twk/watermark.hpp"

namespace twk {

enum class DetectionMode { blind, informed };

/// How two seed symbols are scored in bit accuracy. `symbol` is the exact
/// indicator match; `graded` scores 1 - |s - s'|/(L-1), which coincides with
/// `symbol` at L = 2 and weights near-misses of finer strata proportionally.
enum class AccuracyKind { symbol, graded };

struct RocPoint {
  double threshold = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
  /// False when fewer baseline records than 1/fpr were available, making
  /// the quantile unreliable. Reported, not fatal.
  bool reliable = true;
};

struct DetectionReport {
  DetectionMode mode = DetectionMode::blind;
  std::size_t n = 0;
  std::vector<double> per_sample_acc;
  double mean_acc_w = 0.0;
  double baseline_mean = 0.0;
  double baseline_std = 0.0;
  double z = 0.0;
  std::vector<RocPoint> tpr_curve;

  std::string toJson() const;
};

/// Inverts the Gaussian mapping: s_hat = floor(L * Phi(x)). The boundary
/// value L (possible only at Phi -> 1 exactly) is clamped to L-1.
SeedMatrix recover_seeds(const SeriesTensor& xT_hat, std::size_t bit_levels,
                         std::size_t interval);

/// Applies the inverse temporal permutation per feature column, undoing
/// temporal_shuffle exactly.
SeedMatrix unshuffle(const SeedMatrix& seeds, const WatermarkKey& key);

/// Bit accuracy of an unshuffled seed matrix over the valid set W*.
/// Blind mode (reference == nullptr) verifies chain self-consistency:
/// each row must equal the chained hash of the recovered previous row.
/// Informed mode compares against the stored reference seeds instead.
/// Throws std::domain_error when W* is empty (interval = 1).
double bit_accuracy(const SeedMatrix& recovered, const WatermarkKey& key,
                    const SeedMatrix* reference = nullptr,
                    AccuracyKind kind = AccuracyKind::symbol);

/// Population Z-score of watermarked accuracies against a non-watermarked
/// baseline: z = (mean_w - mean_nw) / (std_nw / sqrt(n)), n = |acc_w|.
/// Requires |acc_nw| >= 2 and a non-degenerate baseline spread.
DetectionReport z_score(std::span<const double> acc_w,
                        std::span<const double> acc_nw);

/// TPR at a fixed FPR. Accuracies are grouped into records of
/// `samples_per_record` consecutive means; the threshold is the (1-fpr)
/// quantile of baseline record means, taking the higher order statistic on
/// ties so the TPR is never overstated.
RocPoint tpr_at_fpr(std::span<const double> acc_w, std::span<const double> acc_nw,
                    double fpr, std::size_t samples_per_record);

/// Per-sample bit accuracies of a batch: BDIA inversion with x1 := x0,
/// seed recovery, unshuffle, and bit accuracy.
std::vector<double> detection_accuracies(const SeriesTensor& x0,
                                         const WatermarkKey& key,
                                         const EmbedParams& params,
                                         const NoiseEstimator& est,
                                         const NoiseSchedule& sched,
                                         DetectionMode mode,
                                         const SeedMatrix* reference = nullptr);

/// End-to-end detection report. When no baseline batch is supplied, a
/// non-watermarked baseline of `baseline_count` samples is synthesized from
/// the key's "baseline" PRF stream and run through the same pipeline.
DetectionReport detect(const SeriesTensor& x0, const WatermarkKey& key,
                       const EmbedParams& params, const NoiseEstimator& est,
                       const NoiseSchedule& sched, DetectionMode mode,
                       const SeriesTensor* baseline_x0 = nullptr,
                       std::size_t baseline_count = 64,
                       const SeedMatrix* reference = nullptr,
                       double fpr = 1e-3, std::size_t samples_per_record = 10);

}  // namespace twk
