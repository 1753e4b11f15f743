#include "twk/detect.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "twk/gaussian.hpp"
#include "twk/parallel.hpp"

namespace twk {

SeedMatrix recover_seeds(const SeriesTensor& xT_hat, std::size_t bit_levels,
                         std::size_t interval) {
  if (xT_hat.batch() != 1) {
    throw std::invalid_argument("recover_seeds: expects a single sample (1 x W x F)");
  }
  xT_hat.requireFinite("recover_seeds");
  const auto L = static_cast<double>(bit_levels);
  SeedMatrix out(xT_hat.window(), xT_hat.features(), bit_levels, interval);
  for (std::size_t w = 0; w < xT_hat.window(); ++w) {
    for (std::size_t f = 0; f < xT_hat.features(); ++f) {
      auto s = static_cast<long>(std::floor(L * gaussian_cdf(xT_hat.at(0, w, f))));
      s = std::clamp(s, 0L, static_cast<long>(bit_levels) - 1);
      out.at(w, f) = static_cast<std::uint32_t>(s);
    }
  }
  return out;
}

SeedMatrix unshuffle(const SeedMatrix& seeds, const WatermarkKey& key) {
  const Prf prf = key.subKey("temporal-shuffle");
  SeedMatrix out(seeds.window(), seeds.features(), seeds.bitLevels(),
                 seeds.interval());
  for (std::size_t f = 0; f < seeds.features(); ++f) {
    const auto perm = keyed_permutation(prf, seeds.window(), {std::uint64_t{f}});
    for (std::size_t w = 0; w < seeds.window(); ++w) {
      out.at(perm[w], f) = seeds.at(w, f);
    }
  }
  return out;
}

double bit_accuracy(const SeedMatrix& recovered, const WatermarkKey& key,
                    const SeedMatrix* reference, AccuracyKind kind) {
  const auto valid = recovered.validTimesteps();
  if (valid.empty()) {
    throw std::domain_error("bit_accuracy: interval 1 leaves no comparable timesteps");
  }
  if (reference != nullptr &&
      (reference->window() != recovered.window() ||
       reference->features() != recovered.features())) {
    throw std::invalid_argument("bit_accuracy: reference shape mismatch");
  }
  const double span = static_cast<double>(recovered.bitLevels() - 1);
  double score = 0.0;
  std::size_t total = 0;
  for (const std::size_t w : valid) {
    std::vector<std::uint32_t> expected;
    if (reference == nullptr) {
      expected = chain_hash(key, w, recovered.row(w - 2));
    } else {
      const auto ref = reference->row(w - 1);
      expected.assign(ref.begin(), ref.end());
    }
    for (std::size_t f = 0; f < recovered.features(); ++f) {
      const double diff = std::fabs(double(recovered.at(w - 1, f)) - double(expected[f]));
      if (kind == AccuracyKind::symbol) {
        score += (diff == 0.0) ? 1.0 : 0.0;
      } else {
        score += 1.0 - diff / span;
      }
      ++total;
    }
  }
  return score / static_cast<double>(total);
}

namespace {

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sampleStd(std::span<const double> v, double m) {
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

DetectionReport z_score(std::span<const double> acc_w,
                        std::span<const double> acc_nw) {
  if (acc_w.empty()) {
    throw std::invalid_argument("z_score: empty watermarked accuracy list");
  }
  if (acc_nw.size() < 2) {
    throw std::invalid_argument("z_score: baseline needs at least two samples");
  }
  DetectionReport r;
  r.n = acc_w.size();
  r.per_sample_acc.assign(acc_w.begin(), acc_w.end());
  r.mean_acc_w = mean(acc_w);
  r.baseline_mean = mean(acc_nw);
  r.baseline_std = sampleStd(acc_nw, r.baseline_mean);
  if (r.baseline_std <= 0.0) {
    throw std::domain_error("z_score: degenerate baseline (zero spread)");
  }
  r.z = (r.mean_acc_w - r.baseline_mean) /
        (r.baseline_std / std::sqrt(static_cast<double>(r.n)));
  return r;
}

RocPoint tpr_at_fpr(std::span<const double> acc_w, std::span<const double> acc_nw,
                    double fpr, std::size_t samples_per_record) {
  if (!(fpr > 0.0 && fpr < 1.0)) {
    throw std::invalid_argument("tpr_at_fpr: fpr must be in (0,1)");
  }
  if (acc_w.empty() || acc_nw.empty() || samples_per_record < 1) {
    throw std::invalid_argument("tpr_at_fpr: empty input");
  }
  auto recordMeans = [samples_per_record](std::span<const double> acc) {
    std::vector<double> means;
    const std::size_t m = acc.size() / samples_per_record;
    means.reserve(m);
    for (std::size_t r = 0; r < m; ++r) {
      double s = 0.0;
      for (std::size_t i = 0; i < samples_per_record; ++i) {
        s += acc[r * samples_per_record + i];
      }
      means.push_back(s / static_cast<double>(samples_per_record));
    }
    return means;
  };
  std::vector<double> w = recordMeans(acc_w);
  std::vector<double> nw = recordMeans(acc_nw);
  if (w.empty() || nw.empty()) {
    throw std::invalid_argument("tpr_at_fpr: fewer samples than one record");
  }
  std::sort(nw.begin(), nw.end());
  // Conservative (1-fpr) quantile: the ceil((1-fpr)*m)-th order statistic.
  const auto m = static_cast<double>(nw.size());
  auto k = static_cast<std::size_t>(std::ceil((1.0 - fpr) * m));
  k = std::clamp<std::size_t>(k, 1, nw.size());
  RocPoint p;
  p.fpr = fpr;
  p.threshold = nw[k - 1];
  std::size_t above = 0;
  for (double v : w) {
    if (v > p.threshold) ++above;
  }
  p.tpr = static_cast<double>(above) / static_cast<double>(w.size());
  p.reliable = m >= 1.0 / fpr;
  return p;
}

std::vector<double> detection_accuracies(const SeriesTensor& x0,
                                         const WatermarkKey& key,
                                         const EmbedParams& params,
                                         const NoiseEstimator& est,
                                         const NoiseSchedule& sched,
                                         DetectionMode mode,
                                         const SeedMatrix* reference) {
  params.validate();
  if (mode == DetectionMode::informed && reference == nullptr) {
    throw std::invalid_argument("detection_accuracies: informed mode needs reference seeds");
  }
  const TrajectoryRecord traj = bdia_invert(x0, std::nullopt, est, sched);
  const SeriesTensor& xT_hat = traj.states[sched.steps];
  std::vector<double> accs(x0.batch(), 0.0);
  parallel_for(x0.batch(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t b = lo; b < hi; ++b) {
      const SeedMatrix rec =
          recover_seeds(xT_hat.slice(b), params.bit_levels, params.interval);
      const SeedMatrix unshuffled = unshuffle(rec, key);
      accs[b] = bit_accuracy(unshuffled, key,
                             mode == DetectionMode::blind ? nullptr : reference);
    }
  });
  return accs;
}

DetectionReport detect(const SeriesTensor& x0, const WatermarkKey& key,
                       const EmbedParams& params, const NoiseEstimator& est,
                       const NoiseSchedule& sched, DetectionMode mode,
                       const SeriesTensor* baseline_x0, std::size_t baseline_count,
                       const SeedMatrix* reference, double fpr,
                       std::size_t samples_per_record) {
  const std::vector<double> acc_w =
      detection_accuracies(x0, key, params, est, sched, mode, reference);

  std::vector<double> acc_nw;
  if (baseline_x0 != nullptr) {
    acc_nw = detection_accuracies(*baseline_x0, key, params, est, sched, mode,
                                  reference);
  } else {
    const SeriesTensor xT_nw =
        standard_normal_tensor(baseline_count, params.window, params.features,
                               key.subKey("baseline"), 0);
    const SeriesTensor x0_nw = bdia_sample(xT_nw, est, sched).states[0];
    acc_nw = detection_accuracies(x0_nw, key, params, est, sched, mode, reference);
  }

  DetectionReport r = z_score(acc_w, acc_nw);
  r.mode = mode;
  const std::size_t spr = std::min(samples_per_record, acc_w.size());
  if (spr >= 1 && acc_nw.size() >= spr) {
    r.tpr_curve.push_back(tpr_at_fpr(acc_w, acc_nw, fpr, spr));
  }
  return r;
}

std::string DetectionReport::toJson() const {
  nlohmann::json j;
  j["mode"] = (mode == DetectionMode::blind) ? "blind" : "informed";
  j["n"] = n;
  j["mean_acc"] = mean_acc_w;
  j["baseline_mean"] = baseline_mean;
  j["baseline_std"] = baseline_std;
  j["z"] = z;
  nlohmann::json curve = nlohmann::json::array();
  for (const auto& p : tpr_curve) {
    curve.push_back({{"fpr", p.fpr},
                     {"tpr", p.tpr},
                     {"threshold", p.threshold},
                     {"reliable", p.reliable}});
  }
  j["tpr_curve"] = curve;
  return j.dump(2);
}

}  // namespace twk
