#pragma once

#include <span>
#include <vector>

#include "twk/detect.hpp"
#include "twk/estimator.hpp"
#include "twk/sampler.hpp"
#include "twk/watermark.hpp"

namespace twk {

/// Outcome of checking the terminal inversion-error bound
///   ||delta_T|| <= c_T * ||x1 - x0||_1,
/// with c_T the product of per-step factors built from the schedule and the
/// estimated Lipschitz constants.
struct BoundReport {
  std::vector<double> delta_t;          // size T+1, index 0 unused
  std::vector<double> per_step_factor;  // size T, indices 1..T-1 used
  double c_T = 0.0;
  double log10_c_T = 0.0;  // c_T can overflow for long schedules
  /// Scalars from the worst trial (largest measured/bound ratio).
  double epsilon_norm = 0.0;
  double measured_delta_T = 0.0;
  bool satisfied = false;  // all trials within the bound
  std::size_t trials = 0;
  std::size_t satisfied_count = 0;
  std::vector<double> trial_measured;
  std::vector<double> trial_epsilon;
  /// Worst relative terminal error of the exact-x1 inversion, which should
  /// sit at float-accumulation level.
  double exact_roundtrip_rel = 0.0;
};

/// Local Lipschitz estimate per step: the max over probes of
/// ||eps(x + d, t) - eps(x, t)||_1 / ||d||_1 with PRF-random perturbations d
/// of the given scale and x drawn from q-sampling the probe data.
/// Returns a vector of size T+1 indexed 1..T.
std::vector<double> estimate_lipschitz(const NoiseEstimator& est,
                                       const NoiseSchedule& sched,
                                       const SeriesTensor& probe_batch,
                                       double perturbation_scale,
                                       std::size_t probes, const Prf& prf);

/// Per-step factors
///   factor_t = |1/g - a_t/g + 1/a_{t+1}| + (|b_t|/g + |b_{t+1}|/a_{t+1}) * Delta_t
/// and their product c_T over t = 1..T-1, accumulated in log space.
/// Returns (factors indexed 1..T-1, c_T).
std::pair<std::vector<double>, double> bound_factor(const NoiseSchedule& sched,
                                                    std::span<const double> delta);

/// Samples true trajectories from the given terminal noises, inverts once
/// with the true x1 (exact-inverse regime) and once with x1 := x0, and
/// checks the measured terminal error against the bound per trial.
BoundReport verify_bound(const SeriesTensor& xT_batch, const NoiseEstimator& est,
                         const NoiseSchedule& sched, std::span<const double> delta);

/// Noise-only bit-accuracy simulation: watermark construction, additive
/// per-feature-biased Gaussian corruption sigma * (m_f + z) with
/// m_f ~ N(0, 5), and blind detection with graded accuracy — diffusion is
/// skipped entirely. With transposed = true the chain runs along the
/// feature axis instead of time. Deterministic in (key, trial index).
double simulate_bit_accuracy(std::size_t window, std::size_t features,
                             std::size_t bit_levels, double sigma,
                             std::size_t trials, std::size_t samples_per_trial,
                             bool transposed, const WatermarkKey& key,
                             std::size_t interval = 2);

}  // namespace twk
