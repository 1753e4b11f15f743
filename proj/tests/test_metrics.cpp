#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "twk/estimator.hpp"
#include "twk/gaussian.hpp"
#include "twk/metrics.hpp"
#include "twk/prf.hpp"

using namespace twk;

namespace {

WatermarkKey testKey(std::uint8_t fill = 0x42) {
  std::array<std::uint8_t, 32> master{};
  master.fill(fill);
  return WatermarkKey(master);
}

SeriesTensor randomTensor(std::size_t B, std::size_t W, std::size_t F,
                          std::uint64_t tag) {
  return standard_normal_tensor(B, W, F, testKey(0x77).subKey("rand"), tag);
}

// Straight-loop oracle for the batch-averaged correlation difference score.
double oracleCorrelational(const SeriesTensor& r, const SeriesTensor& s) {
  const std::size_t F = r.features();
  auto covMat = [&](const SeriesTensor& x) {
    std::vector<double> out(F * F, 0.0);
    for (std::size_t b = 0; b < x.batch(); ++b) {
      for (std::size_t i = 0; i < F; ++i) {
        for (std::size_t j = 0; j < F; ++j) {
          double si = 0, sj = 0, sij = 0;
          for (std::size_t w = 0; w < x.window(); ++w) {
            si += x.at(b, w, i);
            sj += x.at(b, w, j);
            sij += x.at(b, w, i) * x.at(b, w, j);
          }
          const double n = double(x.window());
          out[i * F + j] += sij / n - (si / n) * (sj / n);
        }
      }
    }
    for (auto& v : out) v /= double(x.batch());
    return out;
  };
  const auto cr = covMat(r);
  const auto cs = covMat(s);
  double total = 0.0;
  for (std::size_t i = 0; i < F; ++i) {
    for (std::size_t j = 0; j < F; ++j) {
      const double rr = cr[i * F + j] / std::sqrt(cr[i * F + i] * cr[j * F + j]);
      const double ss = cs[i * F + j] / std::sqrt(cs[i * F + i] * cs[j * F + j]);
      total += std::fabs(rr - ss);
    }
  }
  return total / 10.0;
}

double oracleSkew(const SeriesTensor& x, std::size_t f) {
  const double n = double(x.batch() * x.window());
  double mean = 0;
  for (std::size_t b = 0; b < x.batch(); ++b)
    for (std::size_t w = 0; w < x.window(); ++w) mean += x.at(b, w, f);
  mean /= n;
  double m2 = 0, m3 = 0;
  for (std::size_t b = 0; b < x.batch(); ++b)
    for (std::size_t w = 0; w < x.window(); ++w) {
      const double d = x.at(b, w, f) - mean;
      m2 += d * d;
      m3 += d * d * d;
    }
  m2 /= n;
  m3 /= n;
  return m3 / std::pow(m2, 1.5);
}

}  // namespace

TEST_CASE("covariance: arithmetic example, constants, variance positivity") {
  SeriesTensor x(1, 3, 3);
  const double k1[] = {1, 2, 3};
  const double k2[] = {2, 4, 6};
  for (std::size_t w = 0; w < 3; ++w) {
    x.at(0, w, 0) = k1[w];
    x.at(0, w, 1) = k2[w];
    x.at(0, w, 2) = 5.0;  // constant feature
  }
  CHECK(covariance(x, 0, 1) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  CHECK(covariance(x, 2, 0) == doctest::Approx(0.0));
  CHECK(covariance(x, 2, 1) == doctest::Approx(0.0));

  const SeriesTensor r = randomTensor(1, 16, 4, 1);
  for (std::size_t f = 0; f < 4; ++f) {
    CHECK(covariance(r, f, f) >= 0.0);
  }
}

TEST_CASE("correlational score: zero on identical data, zero for F=1") {
  const SeriesTensor x = randomTensor(6, 12, 5, 2);
  CHECK(correlational_score(x, x) == 0.0);
  const SeriesTensor one = randomTensor(4, 12, 1, 3);
  CHECK(correlational_score(one, one) == 0.0);
}

TEST_CASE("correlational score: opposite perfect correlations give 0.4") {
  SeriesTensor real(2, 8, 2), synth(2, 8, 2);
  const Prf rnd = testKey(0x61).subKey("corr");
  for (std::size_t b = 0; b < 2; ++b) {
    for (std::size_t w = 0; w < 8; ++w) {
      const double v = rnd.unitOpen({b, w}) * 4.0 - 2.0;
      real.at(b, w, 0) = v;
      real.at(b, w, 1) = 2.0 * v;  // rho = +1
      synth.at(b, w, 0) = v;
      synth.at(b, w, 1) = -v;  // rho = -1
    }
  }
  CHECK(correlational_score(real, synth) == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("correlational score rejects zero-variance features") {
  SeriesTensor flat(1, 4, 2);
  for (std::size_t w = 0; w < 4; ++w) {
    flat.at(0, w, 0) = 1.0;
    flat.at(0, w, 1) = double(w);
  }
  CHECK_THROWS_AS(correlational_score(flat, flat), std::domain_error);
}

TEST_CASE("correlational score matches the loop oracle on 50 random instances") {
  for (std::uint64_t c = 0; c < 50; ++c) {
    const std::size_t B = 1 + c % 4;
    const std::size_t W = 4 + c % 7;
    const std::size_t F = 2 + c % 4;
    const SeriesTensor r = randomTensor(B, W, F, 100 + c);
    const SeriesTensor s = randomTensor(B, W, F, 200 + c);
    CHECK(std::fabs(correlational_score(r, s) - oracleCorrelational(r, s)) <= 1e-12);
  }
}

TEST_CASE("correlational score is invariant under joint per-feature affine maps") {
  const SeriesTensor r = randomTensor(3, 10, 4, 5);
  const SeriesTensor s = randomTensor(3, 10, 4, 6);
  const double base = correlational_score(r, s);
  SeriesTensor r2 = r, s2 = s;
  const double scales[] = {2.0, 0.3, 5.0, 1.7};
  const double shifts[] = {-1.0, 4.0, 0.0, 2.5};
  for (auto* t : {&r2, &s2}) {
    for (std::size_t b = 0; b < t->batch(); ++b) {
      for (std::size_t w = 0; w < t->window(); ++w) {
        for (std::size_t f = 0; f < 4; ++f) {
          t->at(b, w, f) = scales[f] * t->at(b, w, f) + shifts[f];
        }
      }
    }
  }
  CHECK(correlational_score(r2, s2) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("aggregate_inversion_error: zeros, constants, loop oracle") {
  const SeriesTensor x = randomTensor(2, 3, 4, 7);
  const auto same = aggregate_inversion_error(x, x);
  for (double v : same.error_time.values) CHECK(v == 0.0);
  for (double v : same.error_features.values) CHECK(v == 0.0);

  SeriesTensor shifted = x;
  for (double& v : shifted.flat()) v += -0.25;
  const auto c = aggregate_inversion_error(shifted, x);
  for (double v : c.error_time.values) CHECK(v == doctest::Approx(0.25).epsilon(1e-14));
  for (double v : c.error_features.values) CHECK(v == doctest::Approx(0.25).epsilon(1e-14));
  for (double v : c.signed_time.values) CHECK(v == doctest::Approx(-0.25).epsilon(1e-14));

  const SeriesTensor y = randomTensor(2, 3, 4, 8);
  const auto rep = aggregate_inversion_error(y, x);
  for (std::size_t b = 0; b < 2; ++b) {
    for (std::size_t f = 0; f < 4; ++f) {
      double s = 0.0;
      for (std::size_t w = 0; w < 3; ++w) s += std::fabs(y.at(b, w, f) - x.at(b, w, f));
      CHECK(std::fabs(rep.error_time.at(b, f) - s / 3.0) <= 1e-15);
    }
    for (std::size_t w = 0; w < 3; ++w) {
      double s = 0.0;
      for (std::size_t f = 0; f < 4; ++f) s += std::fabs(y.at(b, w, f) - x.at(b, w, f));
      CHECK(std::fabs(rep.error_features.at(b, w) - s / 4.0) <= 1e-15);
    }
  }

  SeriesTensor wrong(1, 3, 4);
  CHECK_THROWS_AS(aggregate_inversion_error(wrong, x), std::invalid_argument);
}

TEST_CASE("aggregate_inversion_error is batch-permutation equivariant") {
  const SeriesTensor x = randomTensor(3, 4, 2, 9);
  const SeriesTensor y = randomTensor(3, 4, 2, 10);
  const auto rep = aggregate_inversion_error(y, x);
  // Swap batch entries 0 and 2 in both tensors; rows must swap too.
  SeriesTensor xs = x, ys = y;
  for (std::size_t i = 0; i < x.sampleSize(); ++i) {
    std::swap(xs.sample(0)[i], xs.sample(2)[i]);
    std::swap(ys.sample(0)[i], ys.sample(2)[i]);
  }
  const auto rep2 = aggregate_inversion_error(ys, xs);
  for (std::size_t f = 0; f < 2; ++f) {
    CHECK(rep2.error_time.at(0, f) == rep.error_time.at(2, f));
    CHECK(rep2.error_time.at(2, f) == rep.error_time.at(0, f));
    CHECK(rep2.error_time.at(1, f) == rep.error_time.at(1, f));
  }
}

TEST_CASE("x1_x0_distance: zero at equality and loop oracle") {
  TrajectoryRecord traj;
  traj.states.push_back(randomTensor(3, 4, 2, 11));
  traj.states.push_back(traj.states[0]);
  const auto [avg0, max0] = x1_x0_distance(traj);
  CHECK(avg0 == 0.0);
  CHECK(max0 == 0.0);

  traj.states[1] = randomTensor(3, 4, 2, 12);
  const auto [avg, mx] = x1_x0_distance(traj);
  double oracle_avg = 0.0, oracle_max = 0.0;
  for (std::size_t b = 0; b < 3; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < 8; ++i) {
      const double d =
          std::fabs(traj.states[1].sample(b)[i] - traj.states[0].sample(b)[i]);
      s += d;
      oracle_max = std::max(oracle_max, d);
    }
    oracle_avg += s / 8.0;
  }
  oracle_avg /= 3.0;
  CHECK(std::fabs(avg - oracle_avg) <= 1e-15);
  CHECK(mx == oracle_max);
}

TEST_CASE("tsg metrics: identical data scores zero everywhere") {
  const SeriesTensor x = randomTensor(5, 16, 3, 13);
  const QualityReport q = tsg_metrics(x, x);
  CHECK(q.mdd == 0.0);
  CHECK(q.acd == 0.0);
  CHECK(q.sd == 0.0);
  CHECK(q.kd == 0.0);
  CHECK(quality_report(x, x).correlational == 0.0);
}

TEST_CASE("tsg metrics: negating one feature flips its skew contribution") {
  const std::size_t F = 3;
  SeriesTensor real(4, 32, F);
  const Prf rnd = testKey(0x71).subKey("skew");
  for (std::size_t b = 0; b < 4; ++b) {
    for (std::size_t w = 0; w < 32; ++w) {
      for (std::size_t f = 0; f < F; ++f) {
        const double g = gaussian_ppf(rnd.unitOpen({b, w, f}));
        real.at(b, w, f) = (f == 1) ? std::exp(g) : g;  // feature 1 is skewed
      }
    }
  }
  SeriesTensor synth = real;
  for (std::size_t b = 0; b < 4; ++b) {
    for (std::size_t w = 0; w < 32; ++w) {
      synth.at(b, w, 1) = -synth.at(b, w, 1);
    }
  }
  const QualityReport q = tsg_metrics(real, synth);
  const double expect = 2.0 * std::fabs(oracleSkew(real, 1)) / double(F);
  CHECK(q.sd == doctest::Approx(expect).epsilon(1e-12));
  CHECK(q.kd == doctest::Approx(0.0).epsilon(1e-12));  // kurtosis is even
}

TEST_CASE("tsg metrics match a brute-force oracle on random batches") {
  for (std::uint64_t c = 0; c < 50; ++c) {
    const std::size_t B = 2 + c % 3;
    const std::size_t W = 8 + c % 5;
    const std::size_t F = 1 + c % 3;
    const SeriesTensor r = randomTensor(B, W, F, 300 + c);
    const SeriesTensor s = randomTensor(B, W, F, 400 + c);
    const QualityReport q = tsg_metrics(r, s);

    // SD/KD oracle via pooled central moments.
    double sd = 0.0, kd = 0.0;
    for (std::size_t f = 0; f < F; ++f) {
      auto moments = [&](const SeriesTensor& x) {
        const double n = double(x.batch() * x.window());
        double mean = 0;
        for (std::size_t b = 0; b < x.batch(); ++b)
          for (std::size_t w = 0; w < x.window(); ++w) mean += x.at(b, w, f);
        mean /= n;
        double m2 = 0, m3 = 0, m4 = 0;
        for (std::size_t b = 0; b < x.batch(); ++b)
          for (std::size_t w = 0; w < x.window(); ++w) {
            const double d = x.at(b, w, f) - mean;
            m2 += d * d;
            m3 += d * d * d;
            m4 += d * d * d * d;
          }
        m2 /= n;
        m3 /= n;
        m4 /= n;
        return std::pair<double, double>{m3 / std::pow(m2, 1.5),
                                         m4 / (m2 * m2) - 3.0};
      };
      const auto [skr, kur] = moments(r);
      const auto [sks, kus] = moments(s);
      sd += std::fabs(skr - sks);
      kd += std::fabs(kur - kus);
    }
    CHECK(std::fabs(q.sd - sd / double(F)) <= 1e-12);
    CHECK(std::fabs(q.kd - kd / double(F)) <= 1e-12);
  }
}

TEST_CASE("tsg metrics reject zero variance") {
  SeriesTensor flat(2, 4, 1);
  for (double& v : flat.flat()) v = 3.0;
  const SeriesTensor x = randomTensor(2, 4, 1, 500);
  CHECK_THROWS_AS(tsg_metrics(flat, x), std::domain_error);
}
