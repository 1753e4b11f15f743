#include "twk/theory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "twk/gaussian.hpp"
#include "twk/parallel.hpp"

namespace twk {

std::vector<double> estimate_lipschitz(const NoiseEstimator& est,
                                       const NoiseSchedule& sched,
                                       const SeriesTensor& probe_batch,
                                       double perturbation_scale,
                                       std::size_t probes, const Prf& prf) {
  if (probes < 1) {
    throw std::invalid_argument("estimate_lipschitz: probes must be >= 1");
  }
  if (!(perturbation_scale > 0.0)) {
    throw std::invalid_argument("estimate_lipschitz: perturbation_scale must be > 0");
  }
  const auto W = probe_batch.window();
  const auto F = probe_batch.features();
  const auto d = probe_batch.sampleSize();

  // Cycle the probe data to fill the probe count.
  SeriesTensor base(probes, W, F);
  for (std::size_t p = 0; p < probes; ++p) {
    auto src = probe_batch.sample(p % probe_batch.batch());
    auto dst = base.sample(p);
    std::copy(src.begin(), src.end(), dst.begin());
  }

  std::vector<double> delta(sched.steps + 1, 0.0);
  for (std::size_t t = 1; t <= sched.steps; ++t) {
    const SeriesTensor noise =
        standard_normal_tensor(probes, W, F, prf, 2 * t);
    const SeriesTensor x_t = q_sample(base, t, noise, sched);
    SeriesTensor perturbation =
        standard_normal_tensor(probes, W, F, prf, 2 * t + 1);
    for (double& v : perturbation.flat()) v *= perturbation_scale;
    SeriesTensor x_pert = x_t;
    {
      auto xp = x_pert.flat();
      auto dp = perturbation.flat();
      for (std::size_t i = 0; i < xp.size(); ++i) xp[i] += dp[i];
    }
    const SeriesTensor e0 = est.estimate(x_t, t);
    const SeriesTensor e1 = est.estimate(x_pert, t);
    double worst = 0.0;
    for (std::size_t p = 0; p < probes; ++p) {
      auto a = e0.sample(p);
      auto b = e1.sample(p);
      auto dd = perturbation.sample(p);
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        num += std::fabs(b[i] - a[i]);
        den += std::fabs(dd[i]);
      }
      if (den > 0.0) {
        worst = std::max(worst, num / den);
      }
    }
    delta[t] = worst;
  }
  return delta;
}

std::pair<std::vector<double>, double> bound_factor(const NoiseSchedule& sched,
                                                    std::span<const double> delta) {
  const std::size_t T = sched.steps;
  if (delta.size() != T + 1) {
    throw std::invalid_argument("bound_factor: delta must be indexed 1..T");
  }
  for (std::size_t t = 1; t <= T; ++t) {
    if (delta[t] < 0.0) {
      throw std::invalid_argument("bound_factor: Delta_t must be >= 0");
    }
  }
  const double g = sched.gamma;
  std::vector<double> factors(T, 0.0);
  double log_sum = 0.0;
  for (std::size_t t = 1; t <= T - 1; ++t) {
    const double a_t = sched.ddim_a[t];
    const double a_n = sched.ddim_a[t + 1];
    const double b_t = sched.ddim_b[t];
    const double b_n = sched.ddim_b[t + 1];
    const double f = std::fabs(1.0 / g - a_t / g + 1.0 / a_n) +
                     (std::fabs(b_t) / g) * delta[t] +
                     (std::fabs(b_n) / a_n) * delta[t];
    factors[t] = f;
    log_sum += std::log(f);
  }
  return {std::move(factors), std::exp(log_sum)};
}

BoundReport verify_bound(const SeriesTensor& xT_batch, const NoiseEstimator& est,
                         const NoiseSchedule& sched, std::span<const double> delta) {
  const std::size_t T = sched.steps;
  auto [factors, c_T] = bound_factor(sched, delta);

  const TrajectoryRecord traj = bdia_sample(xT_batch, est, sched);
  const SeriesTensor& x0 = traj.states[0];
  const SeriesTensor& x1 = traj.states[1];
  const TrajectoryRecord exact = bdia_invert(x0, x1, est, sched);
  const TrajectoryRecord approx = bdia_invert(x0, std::nullopt, est, sched);

  BoundReport r;
  r.delta_t.assign(delta.begin(), delta.end());
  r.per_step_factor = std::move(factors);
  r.c_T = c_T;
  double log10_sum = 0.0;
  for (std::size_t t = 1; t <= T - 1; ++t) {
    log10_sum += std::log10(r.per_step_factor[t]);
  }
  r.log10_c_T = log10_sum;
  r.trials = xT_batch.batch();

  double worst_ratio = -1.0;
  for (std::size_t b = 0; b < xT_batch.batch(); ++b) {
    auto truth = xT_batch.sample(b);
    auto got = approx.states[T].sample(b);
    auto got_exact = exact.states[T].sample(b);
    auto s0 = x0.sample(b);
    auto s1 = x1.sample(b);
    double measured = 0.0, eps = 0.0;
    double exact_err = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      measured += std::fabs(got[i] - truth[i]);
      eps += std::fabs(s1[i] - s0[i]);
      exact_err = std::max(exact_err, std::fabs(got_exact[i] - truth[i]));
      scale = std::max(scale, std::fabs(truth[i]));
    }
    if (scale > 0.0) {
      r.exact_roundtrip_rel = std::max(r.exact_roundtrip_rel, exact_err / scale);
    }
    r.trial_measured.push_back(measured);
    r.trial_epsilon.push_back(eps);
    const double bound = r.c_T * eps;
    const bool ok = measured <= bound * (1.0 + 1e-9) + 1e-12;
    if (ok) ++r.satisfied_count;
    const double ratio = (bound > 0.0) ? measured / bound
                                       : (measured > 0.0 ? 1e300 : 0.0);
    if (ratio > worst_ratio) {
      worst_ratio = ratio;
      r.measured_delta_T = measured;
      r.epsilon_norm = eps;
    }
  }
  r.satisfied = r.satisfied_count == r.trials;
  return r;
}

double simulate_bit_accuracy(std::size_t window, std::size_t features,
                             std::size_t bit_levels, double sigma,
                             std::size_t trials, std::size_t samples_per_trial,
                             bool transposed, const WatermarkKey& key,
                             std::size_t interval) {
  if (trials < 1 || samples_per_trial < 1) {
    throw std::invalid_argument("simulate_bit_accuracy: counts must be >= 1");
  }
  if (sigma < 0.0) {
    throw std::invalid_argument("simulate_bit_accuracy: sigma must be >= 0");
  }
  // Chain layout: axis 0 carries the chain. Transposed runs it along the
  // feature axis, so the layout dimensions swap while the corruption still
  // applies per data feature.
  const std::size_t chain_len = transposed ? features : window;
  const std::size_t cross_len = transposed ? window : features;
  EmbedParams params;
  params.bit_levels = bit_levels;
  params.interval = interval;
  params.window = chain_len;
  params.features = cross_len;
  params.key = key;
  params.validate();

  const SeedMatrix seeds = generate_seeds(params);
  const SeedMatrix shuffled = temporal_shuffle(seeds, key);
  const Prf noise_prf = key.subKey("sim-noise");
  const double mu_scale = 5.0;  // feature means m_f ~ N(0, 5^2)

  std::vector<double> trial_acc(trials, 0.0);
  parallel_for(trials, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t trial = lo; trial < hi; ++trial) {
      double acc = 0.0;
      for (std::size_t i = 0; i < samples_per_trial; ++i) {
        const std::uint64_t sample_tag = trial * samples_per_trial + i;
        SeriesTensor x = construct_noise(shuffled, key, sample_tag);
        if (sigma > 0.0) {
          std::vector<double> mu(features);
          for (std::size_t f = 0; f < features; ++f) {
            mu[f] = mu_scale * gaussian_ppf(noise_prf.unitOpen(
                                  {0, trial, std::uint64_t{i}, std::uint64_t{f}}));
          }
          for (std::size_t a = 0; a < chain_len; ++a) {
            for (std::size_t c = 0; c < cross_len; ++c) {
              const std::size_t f = transposed ? a : c;
              const double z = gaussian_ppf(noise_prf.unitOpen(
                  {1, trial, std::uint64_t{i}, std::uint64_t{a}, std::uint64_t{c}}));
              x.at(0, a, c) += sigma * (mu[f] + z);
            }
          }
        }
        const SeedMatrix rec = recover_seeds(x, bit_levels, interval);
        const SeedMatrix uns = unshuffle(rec, key);
        acc += bit_accuracy(uns, key, nullptr, AccuracyKind::graded);
      }
      trial_acc[trial] = acc / static_cast<double>(samples_per_trial);
    }
  });
  double total = 0.0;
  for (double a : trial_acc) total += a;
  return total / static_cast<double>(trials);
}

}  // namespace twk
