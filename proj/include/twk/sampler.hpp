#pragma once

#include <optional>
#include <vector>

#include "twk/estimator.hpp"
#include "twk/schedule.hpp"
#include "twk/tensor.hpp"

namespace twk {

/// Full sequence of diffusion states x_0..x_T produced by a sampler or an
/// inversion pass. states[t] is the batch state at step t.
struct TrajectoryRecord {
  std::vector<SeriesTensor> states;

  std::size_t steps() const { return states.empty() ? 0 : states.size() - 1; }
  const SeriesTensor& state(std::size_t t) const { return states[t]; }
};

/// One deterministic DDIM update: x_{t-1} = a_t x_t + b_t eps_hat(x_t, t).
SeriesTensor ddim_step(const SeriesTensor& x_t, std::size_t t,
                       const NoiseEstimator& est, const NoiseSchedule& sched);

/// Approximate DDIM inversion step, reusing eps_hat(x_t, t+1) in place of
/// the unknown eps_hat(x_{t+1}, t+1):
/// x_{t+1} = (x_t - b_{t+1} eps_hat(x_t, t+1)) / a_{t+1}.
SeriesTensor ddim_invert_step(const SeriesTensor& x_t, std::size_t t,
                              const NoiseEstimator& est, const NoiseSchedule& sched);

/// Runs DDIM from state x at step t_start all the way down to x_0.
SeriesTensor ddim_generate(const SeriesTensor& x, std::size_t t_start,
                           const NoiseEstimator& est, const NoiseSchedule& sched);

/// BDIA sampling. The first update bootstraps with one DDIM step (no x_{T+1}
/// exists); afterwards each x_{t-1} combines (x_{t+1}, x_t, eps_hat(x_t, t)):
///   x_{t-1} = gamma (x_{t+1} - x_t)
///           - gamma (x_t / a_{t+1} - (b_{t+1}/a_{t+1}) eps_hat - x_t)
///           + a_t x_t + b_t eps_hat.
TrajectoryRecord bdia_sample(const SeriesTensor& x_T, const NoiseEstimator& est,
                             const NoiseSchedule& sched);

/// Exact algebraic inverse of the BDIA recurrence. When x1 is absent it is
/// seeded with x0 itself; the resulting terminal error is bounded by
/// C_T * ||x1 - x0|| (see the theory module).
TrajectoryRecord bdia_invert(const SeriesTensor& x0,
                             const std::optional<SeriesTensor>& x1,
                             const NoiseEstimator& est, const NoiseSchedule& sched);

/// Closed-form forward noising x_t = sqrt(abar_t) x0 + sqrt(1-abar_t) noise.
/// t = 0 returns x0 unchanged.
SeriesTensor q_sample(const SeriesTensor& x0, std::size_t t,
                      const SeriesTensor& noise, const NoiseSchedule& sched);

}  // namespace twk
