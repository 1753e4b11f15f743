#include "twk/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace twk {

NoiseSchedule build_schedule(std::size_t T, ScheduleKind kind, double beta_min,
                             double beta_max, double gamma) {
  if (T < 2) {
    throw std::invalid_argument("build_schedule: T must be >= 2");
  }
  if (!(beta_min > 0.0 && beta_min <= beta_max && beta_max < 1.0)) {
    throw std::invalid_argument("build_schedule: need 0 < beta_min <= beta_max < 1");
  }
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("build_schedule: gamma must be in (0,1]");
  }

  NoiseSchedule s;
  s.steps = T;
  s.gamma = gamma;
  s.beta.assign(T + 1, 0.0);
  s.alpha_bar.assign(T + 1, 1.0);
  s.ddim_a.assign(T + 1, 0.0);
  s.ddim_b.assign(T + 1, 0.0);

  if (kind == ScheduleKind::linear) {
    for (std::size_t t = 1; t <= T; ++t) {
      const double frac = (T == 1) ? 0.0 : double(t - 1) / double(T - 1);
      s.beta[t] = beta_min + (beta_max - beta_min) * frac;
    }
  } else {
    // abar_t = cos^2((t/T + s)/(1+s) * pi/2) / cos^2(s * pi/2), s = 0.008,
    // turned into betas and clipped so every invariant still holds.
    const double off = 0.008;
    const double half_pi = std::numbers::pi / 2.0;
    auto abar = [&](double t) {
      const double c = std::cos((t / double(T) + off) / (1.0 + off) * half_pi);
      const double c0 = std::cos(off * half_pi);
      return (c * c) / (c0 * c0);
    };
    double prev = 1.0;
    for (std::size_t t = 1; t <= T; ++t) {
      const double cur = abar(double(t));
      double beta = 1.0 - cur / prev;
      beta = std::clamp(beta, beta_min, beta_max);
      s.beta[t] = beta;
      prev *= 1.0 - beta;
    }
  }

  for (std::size_t t = 1; t <= T; ++t) {
    s.alpha_bar[t] = s.alpha_bar[t - 1] * (1.0 - s.beta[t]);
    s.ddim_a[t] = std::sqrt(s.alpha_bar[t - 1] / s.alpha_bar[t]);
    s.ddim_b[t] = std::sqrt(1.0 - s.alpha_bar[t - 1]) -
                  s.ddim_a[t] * std::sqrt(1.0 - s.alpha_bar[t]);
  }
  return s;
}

}  // namespace twk
