#pragma once

#include <cstddef>
#include <vector>

namespace twk {

enum class ScheduleKind { linear, cosine };

/// Per-step diffusion coefficients for T steps. Step indices are 1-based:
/// beta/ddim_a/ddim_b are valid for t in [1,T], alpha_bar for t in [0,T]
/// with alpha_bar[0] = 1 by convention. The deterministic DDIM update is
/// x_{t-1} = ddim_a[t] * x_t + ddim_b[t] * eps_hat(x_t, t).
struct NoiseSchedule {
  std::size_t steps = 0;
  std::vector<double> beta;       // size steps+1, index 0 unused
  std::vector<double> alpha_bar;  // size steps+1
  std::vector<double> ddim_a;     // size steps+1, index 0 unused
  std::vector<double> ddim_b;     // size steps+1, index 0 unused
  double gamma = 1.0;             // BDIA mixing weight, in (0,1]
};

/// Builds a schedule with a_t = sqrt(abar_{t-1}/abar_t) and
/// b_t = sqrt(1-abar_{t-1}) - a_t * sqrt(1-abar_t).
/// Preconditions: T >= 2, 0 < beta_min <= beta_max < 1, gamma in (0,1].
/// For the cosine kind beta_min/beta_max only clip the derived betas.
NoiseSchedule build_schedule(std::size_t T, ScheduleKind kind, double beta_min,
                             double beta_max, double gamma);

}  // namespace twk
