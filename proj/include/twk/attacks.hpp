#pragma once

#include <string>
#include <string_view>

#include "twk/estimator.hpp"
#include "twk/prf.hpp"
#include "twk/sampler.hpp"
#include "twk/tensor.hpp"

namespace twk {

enum class AttackKind { offset, random_crop, minmax_insert, reconstruct };

struct AttackSpec {
  AttackKind kind = AttackKind::offset;
  double strength = 0.0;  // in [0,1]; ignored by reconstruct
  std::uint64_t rng_tag = 0;

  /// Parses "kind:strength", e.g. "crop:0.30" or "offset:0.05".
  /// Kind names: offset, crop, minmax, reconstruct.
  static AttackSpec parse(std::string_view text);
  std::string toString() const;
};

/// Adds a per-feature constant c_f = p * mean_w |x^{w,f}| across all
/// timesteps of that feature.
SeriesTensor offset_attack(const SeriesTensor& x, double p);

/// Zeroes a contiguous ceil(p*W) x ceil(p*F) block at a PRF-chosen origin,
/// per batch entry.
SeriesTensor crop_attack(const SeriesTensor& x, double p, const WatermarkKey& key,
                         std::uint64_t rng_tag);

/// Replaces floor(p*W) PRF-chosen timesteps per feature with uniform draws
/// from that feature's [min, max] range.
SeriesTensor minmax_insert_attack(const SeriesTensor& x, double p,
                                  const WatermarkKey& key, std::uint64_t rng_tag);

/// Forward-noises to the midpoint step floor(T/2) with fresh PRF Gaussian
/// noise, then denoises back with deterministic DDIM.
SeriesTensor reconstruction_attack(const SeriesTensor& x, const NoiseEstimator& est,
                                   const NoiseSchedule& sched,
                                   const WatermarkKey& key, std::uint64_t rng_tag);

/// Dispatches on spec.kind. `est`/`sched` are only required for reconstruct.
SeriesTensor apply_attack(const SeriesTensor& x, const AttackSpec& spec,
                          const WatermarkKey& key,
                          const NoiseEstimator* est = nullptr,
                          const NoiseSchedule* sched = nullptr);

}  // namespace twk
