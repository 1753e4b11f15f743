#pragma once

#include <memory>
#include <optional>
#include <string>

#include "twk/attacks.hpp"
#include "twk/estimator.hpp"
#include "twk/io.hpp"
#include "twk/prf.hpp"
#include "twk/schedule.hpp"
#include "twk/watermark.hpp"

namespace twk {

/// Run configuration parsed from a plain-text key=value file. Unknown keys
/// are rejected; '#' starts a comment.
struct RunConfig {
  std::string dataset;        // CSV path (required by data-driven commands)
  std::size_t window = 24;    // W
  std::size_t interval = 2;   // H
  std::size_t bits = 2;       // L
  std::size_t steps = 100;    // T
  double gamma = 1.0;
  ScheduleKind schedule = ScheduleKind::linear;
  double beta_min = 1e-4;
  double beta_max = 2e-2;
  std::string key_hex;        // 64 hex chars
  std::string estimator = "analytic";  // "analytic" or "loaded:<path>"
  std::size_t batch = 64;
  std::optional<AttackSpec> attack;
  std::string out = ".";
  Normalization normalization = Normalization::minmax;
  std::size_t fit_stride = 1;      // stride when fitting the estimator
  std::size_t baseline = 64;       // baseline sample count for detection
  double fpr = 1e-3;
  std::size_t samples_per_record = 10;
  double z_threshold = 4.0;
  std::size_t threads = 1;
  double ridge = 1e-6;

  static RunConfig load(const std::string& path);

  WatermarkKey key() const;
  NoiseSchedule makeSchedule() const;
  EmbedParams embedParams(std::size_t features) const;

  /// Loads + normalizes the dataset and builds the configured estimator.
  /// For "analytic" the estimator is fitted from stride-`fit_stride` windows.
  struct Prepared {
    Dataset data;
    std::unique_ptr<NoiseEstimator> estimator;
    std::size_t features = 0;
  };
  Prepared prepare() const;
};

}  // namespace twk
