#include "twk/sampler.hpp"

#include <cmath>
#include <stdexcept>

namespace twk {

namespace {

void checkStep(std::size_t t, std::size_t lo, std::size_t hi, const char* what) {
  if (t < lo || t > hi) {
    throw std::invalid_argument(std::string(what) + ": step index out of range");
  }
}

}  // namespace

SeriesTensor ddim_step(const SeriesTensor& x_t, std::size_t t,
                       const NoiseEstimator& est, const NoiseSchedule& sched) {
  checkStep(t, 1, sched.steps, "ddim_step");
  const SeriesTensor eps = est.estimate(x_t, t);
  SeriesTensor out(x_t.batch(), x_t.window(), x_t.features());
  const double a = sched.ddim_a[t];
  const double b = sched.ddim_b[t];
  auto xi = x_t.flat();
  auto ei = eps.flat();
  auto oi = out.flat();
  for (std::size_t i = 0; i < oi.size(); ++i) {
    oi[i] = a * xi[i] + b * ei[i];
  }
  return out;
}

SeriesTensor ddim_invert_step(const SeriesTensor& x_t, std::size_t t,
                              const NoiseEstimator& est, const NoiseSchedule& sched) {
  checkStep(t, 0, sched.steps - 1, "ddim_invert_step");
  const SeriesTensor eps = est.estimate(x_t, t + 1);
  SeriesTensor out(x_t.batch(), x_t.window(), x_t.features());
  const double a = sched.ddim_a[t + 1];
  const double b = sched.ddim_b[t + 1];
  auto xi = x_t.flat();
  auto ei = eps.flat();
  auto oi = out.flat();
  for (std::size_t i = 0; i < oi.size(); ++i) {
    oi[i] = (xi[i] - b * ei[i]) / a;
  }
  return out;
}

SeriesTensor ddim_generate(const SeriesTensor& x, std::size_t t_start,
                           const NoiseEstimator& est, const NoiseSchedule& sched) {
  checkStep(t_start, 1, sched.steps, "ddim_generate");
  SeriesTensor cur = x;
  for (std::size_t t = t_start; t >= 1; --t) {
    cur = ddim_step(cur, t, est, sched);
  }
  return cur;
}

TrajectoryRecord bdia_sample(const SeriesTensor& x_T, const NoiseEstimator& est,
                             const NoiseSchedule& sched) {
  const std::size_t T = sched.steps;
  TrajectoryRecord traj;
  traj.states.resize(T + 1);
  traj.states[T] = x_T;
  traj.states[T - 1] = ddim_step(x_T, T, est, sched);
  const double gamma = sched.gamma;
  for (std::size_t t = T - 1; t >= 1; --t) {
    const SeriesTensor eps = est.estimate(traj.states[t], t);
    SeriesTensor next(x_T.batch(), x_T.window(), x_T.features());
    const double a_t = sched.ddim_a[t];
    const double b_t = sched.ddim_b[t];
    const double a_n = sched.ddim_a[t + 1];
    const double b_n = sched.ddim_b[t + 1];
    auto xp = traj.states[t + 1].flat();
    auto xc = traj.states[t].flat();
    auto ei = eps.flat();
    auto oi = next.flat();
    for (std::size_t i = 0; i < oi.size(); ++i) {
      oi[i] = gamma * (xp[i] - xc[i]) -
              gamma * (xc[i] / a_n - (b_n / a_n) * ei[i] - xc[i]) +
              (a_t * xc[i] + b_t * ei[i]);
    }
    traj.states[t - 1] = std::move(next);
  }
  traj.states[0].requireFinite("bdia_sample");
  return traj;
}

TrajectoryRecord bdia_invert(const SeriesTensor& x0,
                             const std::optional<SeriesTensor>& x1,
                             const NoiseEstimator& est, const NoiseSchedule& sched) {
  const std::size_t T = sched.steps;
  if (x1 && !x1->sameShape(x0)) {
    throw std::invalid_argument("bdia_invert: x0/x1 shape mismatch");
  }
  TrajectoryRecord traj;
  traj.states.resize(T + 1);
  traj.states[0] = x0;
  traj.states[1] = x1 ? *x1 : x0;
  const double gamma = sched.gamma;
  for (std::size_t t = 1; t <= T - 1; ++t) {
    const SeriesTensor eps = est.estimate(traj.states[t], t);
    SeriesTensor next(x0.batch(), x0.window(), x0.features());
    const double a_t = sched.ddim_a[t];
    const double b_t = sched.ddim_b[t];
    const double a_n = sched.ddim_a[t + 1];
    const double b_n = sched.ddim_b[t + 1];
    auto xm = traj.states[t - 1].flat();
    auto xc = traj.states[t].flat();
    auto ei = eps.flat();
    auto oi = next.flat();
    for (std::size_t i = 0; i < oi.size(); ++i) {
      oi[i] = xm[i] / gamma - (a_t * xc[i] + b_t * ei[i]) / gamma +
              (xc[i] / a_n - (b_n / a_n) * ei[i]);
    }
    traj.states[t + 1] = std::move(next);
  }
  traj.states[T].requireFinite("bdia_invert");
  return traj;
}

SeriesTensor q_sample(const SeriesTensor& x0, std::size_t t,
                      const SeriesTensor& noise, const NoiseSchedule& sched) {
  checkStep(t, 0, sched.steps, "q_sample");
  if (!noise.sameShape(x0)) {
    throw std::invalid_argument("q_sample: noise shape mismatch");
  }
  const double abar = sched.alpha_bar[t];
  const double sa = std::sqrt(abar);
  const double sn = std::sqrt(1.0 - abar);
  SeriesTensor out(x0.batch(), x0.window(), x0.features());
  auto xi = x0.flat();
  auto ni = noise.flat();
  auto oi = out.flat();
  for (std::size_t i = 0; i < oi.size(); ++i) {
    oi[i] = sa * xi[i] + sn * ni[i];
  }
  return out;
}

}  // namespace twk
