#include "twk/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace twk {

double covariance(const SeriesTensor& series, std::size_t i, std::size_t j) {
  if (series.batch() != 1) {
    throw std::invalid_argument("covariance: expects a single W x F series");
  }
  if (i >= series.features() || j >= series.features()) {
    throw std::invalid_argument("covariance: feature index out of range");
  }
  const auto W = series.window();
  double si = 0.0, sj = 0.0, sij = 0.0;
  for (std::size_t w = 0; w < W; ++w) {
    const double a = series.at(0, w, i);
    const double b = series.at(0, w, j);
    si += a;
    sj += b;
    sij += a * b;
  }
  const auto n = static_cast<double>(W);
  return sij / n - (si / n) * (sj / n);
}

namespace {

// Per-pair covariance averaged over the batch.
std::vector<double> batchCovarianceMatrix(const SeriesTensor& batch) {
  const auto F = batch.features();
  const auto W = batch.window();
  std::vector<double> cov(F * F, 0.0);
  for (std::size_t b = 0; b < batch.batch(); ++b) {
    std::vector<double> means(F, 0.0);
    for (std::size_t w = 0; w < W; ++w) {
      for (std::size_t f = 0; f < F; ++f) {
        means[f] += batch.at(b, w, f);
      }
    }
    for (auto& m : means) m /= static_cast<double>(W);
    for (std::size_t i = 0; i < F; ++i) {
      for (std::size_t j = i; j < F; ++j) {
        double s = 0.0;
        for (std::size_t w = 0; w < W; ++w) {
          s += (batch.at(b, w, i) - means[i]) * (batch.at(b, w, j) - means[j]);
        }
        cov[i * F + j] += s / static_cast<double>(W);
      }
    }
  }
  for (std::size_t i = 0; i < F; ++i) {
    for (std::size_t j = i; j < F; ++j) {
      cov[i * F + j] /= static_cast<double>(batch.batch());
      cov[j * F + i] = cov[i * F + j];
    }
  }
  return cov;
}

std::vector<double> correlationMatrix(const SeriesTensor& batch) {
  const auto F = batch.features();
  std::vector<double> cov = batchCovarianceMatrix(batch);
  for (std::size_t f = 0; f < F; ++f) {
    if (cov[f * F + f] <= 0.0) {
      throw std::domain_error("correlational_score: degenerate (zero-variance) feature");
    }
  }
  std::vector<double> rho(F * F, 0.0);
  for (std::size_t i = 0; i < F; ++i) {
    for (std::size_t j = 0; j < F; ++j) {
      rho[i * F + j] = cov[i * F + j] / std::sqrt(cov[i * F + i] * cov[j * F + j]);
    }
  }
  return rho;
}

}  // namespace

double correlational_score(const SeriesTensor& real_batch,
                           const SeriesTensor& synth_batch) {
  if (real_batch.features() != synth_batch.features()) {
    throw std::invalid_argument("correlational_score: feature count mismatch");
  }
  if (real_batch.batch() < 1 || synth_batch.batch() < 1) {
    throw std::invalid_argument("correlational_score: empty batch");
  }
  const auto F = real_batch.features();
  const auto rr = correlationMatrix(real_batch);
  const auto rs = correlationMatrix(synth_batch);
  double acc = 0.0;
  for (std::size_t i = 0; i < F; ++i) {
    for (std::size_t j = 0; j < F; ++j) {
      acc += std::fabs(rr[i * F + j] - rs[i * F + j]);
    }
  }
  return acc / 10.0;
}

InversionErrorReport aggregate_inversion_error(const SeriesTensor& x0_hat,
                                               const SeriesTensor& x0) {
  if (!x0_hat.sameShape(x0)) {
    throw std::invalid_argument("aggregate_inversion_error: shape mismatch");
  }
  const auto B = x0.batch();
  const auto W = x0.window();
  const auto F = x0.features();
  InversionErrorReport r;
  r.error_time = RealMatrix(B, F);
  r.signed_time = RealMatrix(B, F);
  r.error_features = RealMatrix(B, W);
  r.signed_features = RealMatrix(B, W);
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t w = 0; w < W; ++w) {
      for (std::size_t f = 0; f < F; ++f) {
        const double d = x0_hat.at(b, w, f) - x0.at(b, w, f);
        r.error_time.at(b, f) += std::fabs(d);
        r.signed_time.at(b, f) += d;
        r.error_features.at(b, w) += std::fabs(d);
        r.signed_features.at(b, w) += d;
      }
    }
  }
  for (auto& v : r.error_time.values) v /= static_cast<double>(W);
  for (auto& v : r.signed_time.values) v /= static_cast<double>(W);
  for (auto& v : r.error_features.values) v /= static_cast<double>(F);
  for (auto& v : r.signed_features.values) v /= static_cast<double>(F);
  return r;
}

std::pair<double, double> x1_x0_distance(const TrajectoryRecord& traj) {
  if (traj.states.size() < 2) {
    throw std::invalid_argument("x1_x0_distance: trajectory too short");
  }
  const SeriesTensor& x0 = traj.states[0];
  const SeriesTensor& x1 = traj.states[1];
  double avg = 0.0;
  double worst = 0.0;
  for (std::size_t b = 0; b < x0.batch(); ++b) {
    auto a = x0.sample(b);
    auto c = x1.sample(b);
    double sum = 0.0, mx = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = std::fabs(c[i] - a[i]);
      sum += d;
      mx = std::max(mx, d);
    }
    avg += sum / static_cast<double>(a.size());
    worst = std::max(worst, mx);
  }
  return {avg / static_cast<double>(x0.batch()), worst};
}

namespace {

struct FeatureMoments {
  double mean = 0.0;
  double m2 = 0.0;
  double skew = 0.0;
  double exkurt = 0.0;
};

FeatureMoments pooledMoments(const SeriesTensor& batch, std::size_t f) {
  const double n = static_cast<double>(batch.batch() * batch.window());
  double mean = 0.0;
  for (std::size_t b = 0; b < batch.batch(); ++b) {
    for (std::size_t w = 0; w < batch.window(); ++w) {
      mean += batch.at(b, w, f);
    }
  }
  mean /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (std::size_t b = 0; b < batch.batch(); ++b) {
    for (std::size_t w = 0; w < batch.window(); ++w) {
      const double d = batch.at(b, w, f) - mean;
      m2 += d * d;
      m3 += d * d * d;
      m4 += d * d * d * d;
    }
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (m2 <= 0.0) {
    throw std::domain_error("tsg_metrics: degenerate (zero-variance) feature");
  }
  FeatureMoments out;
  out.mean = mean;
  out.m2 = m2;
  out.skew = m3 / std::pow(m2, 1.5);
  out.exkurt = m4 / (m2 * m2) - 3.0;
  return out;
}

// Biased per-sample autocorrelation at the given lag, averaged over batch.
double batchAcf(const SeriesTensor& batch, std::size_t f, std::size_t lag) {
  const auto W = batch.window();
  if (lag >= W) {
    return 0.0;
  }
  double acc = 0.0;
  for (std::size_t b = 0; b < batch.batch(); ++b) {
    double mean = 0.0;
    for (std::size_t w = 0; w < W; ++w) mean += batch.at(b, w, f);
    mean /= static_cast<double>(W);
    double num = 0.0, den = 0.0;
    for (std::size_t w = 0; w < W; ++w) {
      const double d = batch.at(b, w, f) - mean;
      den += d * d;
      if (w + lag < W) {
        num += d * (batch.at(b, w + lag, f) - mean);
      }
    }
    if (den <= 0.0) {
      throw std::domain_error("tsg_metrics: degenerate (zero-variance) feature");
    }
    acc += num / den;
  }
  return acc / static_cast<double>(batch.batch());
}

constexpr std::size_t kHistogramBins = 50;
constexpr std::size_t kAcfLags = 5;

double histogramL1(const SeriesTensor& a, const SeriesTensor& b, std::size_t f) {
  double lo = a.at(0, 0, f);
  double hi = lo;
  auto scan = [&](const SeriesTensor& t) {
    for (std::size_t i = 0; i < t.batch(); ++i) {
      for (std::size_t w = 0; w < t.window(); ++w) {
        lo = std::min(lo, t.at(i, w, f));
        hi = std::max(hi, t.at(i, w, f));
      }
    }
  };
  scan(a);
  scan(b);
  if (hi <= lo) {
    return 0.0;  // both datasets constant at the same value
  }
  auto fill = [&](const SeriesTensor& t) {
    std::vector<double> h(kHistogramBins, 0.0);
    const double inv = static_cast<double>(kHistogramBins) / (hi - lo);
    for (std::size_t i = 0; i < t.batch(); ++i) {
      for (std::size_t w = 0; w < t.window(); ++w) {
        auto bin = static_cast<std::size_t>((t.at(i, w, f) - lo) * inv);
        bin = std::min(bin, kHistogramBins - 1);
        h[bin] += 1.0;
      }
    }
    const double n = static_cast<double>(t.batch() * t.window());
    for (auto& v : h) v /= n;
    return h;
  };
  const auto ha = fill(a);
  const auto hb = fill(b);
  double l1 = 0.0;
  for (std::size_t i = 0; i < kHistogramBins; ++i) {
    l1 += std::fabs(ha[i] - hb[i]);
  }
  return l1;
}

}  // namespace

QualityReport tsg_metrics(const SeriesTensor& real_batch,
                          const SeriesTensor& synth_batch) {
  if (real_batch.features() != synth_batch.features()) {
    throw std::invalid_argument("tsg_metrics: feature count mismatch");
  }
  if (real_batch.empty() || synth_batch.empty()) {
    throw std::invalid_argument("tsg_metrics: empty batch");
  }
  const auto F = real_batch.features();
  QualityReport q;
  for (std::size_t f = 0; f < F; ++f) {
    q.mdd += histogramL1(real_batch, synth_batch, f);
    const auto mr = pooledMoments(real_batch, f);
    const auto ms = pooledMoments(synth_batch, f);
    q.sd += std::fabs(mr.skew - ms.skew);
    q.kd += std::fabs(mr.exkurt - ms.exkurt);
    double acf = 0.0;
    for (std::size_t lag = 1; lag <= kAcfLags; ++lag) {
      acf += std::fabs(batchAcf(real_batch, f, lag) - batchAcf(synth_batch, f, lag));
    }
    q.acd += acf / static_cast<double>(kAcfLags);
  }
  const auto fd = static_cast<double>(F);
  q.mdd /= fd;
  q.acd /= fd;
  q.sd /= fd;
  q.kd /= fd;
  return q;
}

QualityReport quality_report(const SeriesTensor& real_batch,
                             const SeriesTensor& synth_batch) {
  QualityReport q = tsg_metrics(real_batch, synth_batch);
  q.correlational = correlational_score(real_batch, synth_batch);
  return q;
}

}  // namespace twk
