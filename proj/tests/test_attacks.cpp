#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Core>

#include <cmath>

#include "twk/attacks.hpp"
#include "twk/detect.hpp"
#include "twk/watermark.hpp"

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

std::size_t countDiffs(const SeriesTensor& a, const SeriesTensor& b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.flat()[i] != b.flat()[i]) ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("attack spec parsing") {
  const auto a = AttackSpec::parse("crop:0.30");
  CHECK(a.kind == AttackKind::random_crop);
  CHECK(a.strength == doctest::Approx(0.30));
  CHECK(AttackSpec::parse("offset:0.05").kind == AttackKind::offset);
  CHECK(AttackSpec::parse("minmax:1").strength == 1.0);
  CHECK(AttackSpec::parse("reconstruct").kind == AttackKind::reconstruct);
  CHECK_THROWS_AS(AttackSpec::parse("bogus:0.1"), std::invalid_argument);
  CHECK_THROWS_AS(AttackSpec::parse("crop:1.5"), std::invalid_argument);
  CHECK_THROWS_AS(AttackSpec::parse("crop"), std::invalid_argument);
}

TEST_CASE("offset attack: identity at p=0 and per-feature constant shift") {
  const SeriesTensor x = randomTensor(3, 7, 4, 1);
  CHECK(countDiffs(offset_attack(x, 0.0), x) == 0);

  SeriesTensor vals(1, 3, 1);
  vals.at(0, 0, 0) = 1.0;
  vals.at(0, 1, 0) = -1.0;
  vals.at(0, 2, 0) = 3.0;
  const SeriesTensor shifted = offset_attack(vals, 0.05);
  for (std::size_t w = 0; w < 3; ++w) {
    CHECK(shifted.at(0, w, 0) - vals.at(0, w, 0) ==
          doctest::Approx(0.05 * (5.0 / 3.0)).epsilon(1e-12));
    CHECK(shifted.at(0, w, 0) - vals.at(0, w, 0) ==
          doctest::Approx(0.08333).epsilon(1e-3));
  }

  const SeriesTensor big = offset_attack(x, 0.4);
  for (std::size_t b = 0; b < x.batch(); ++b) {
    for (std::size_t f = 0; f < x.features(); ++f) {
      const double c0 = big.at(b, 0, f) - x.at(b, 0, f);
      for (std::size_t w = 1; w < x.window(); ++w) {
        CHECK(big.at(b, w, f) - x.at(b, w, f) == doctest::Approx(c0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("crop attack: boundaries and exact zeroed block size") {
  const WatermarkKey key = testKey();
  const SeriesTensor x = randomTensor(4, 9, 5, 2);
  CHECK(countDiffs(crop_attack(x, 0.0, key, 0), x) == 0);

  const SeriesTensor all = crop_attack(x, 1.0, key, 0);
  for (double v : all.flat()) CHECK(v == 0.0);

  for (const double p : {0.2, 0.33, 0.5, 0.77}) {
    const SeriesTensor cropped = crop_attack(x, p, key, 7);
    const auto hw = static_cast<std::size_t>(std::ceil(p * 9));
    const auto hf = static_cast<std::size_t>(std::ceil(p * 5));
    CHECK(countDiffs(cropped, x) == x.batch() * hw * hf);
    // Zeroed entries form one contiguous block per batch entry.
    for (std::size_t b = 0; b < x.batch(); ++b) {
      std::size_t zeros = 0;
      for (std::size_t w = 0; w < 9; ++w) {
        for (std::size_t f = 0; f < 5; ++f) {
          if (cropped.at(b, w, f) == 0.0) ++zeros;
        }
      }
      CHECK(zeros == hw * hf);
    }
  }
}

TEST_CASE("minmax insertion: counts, range containment, identity at p=0") {
  const WatermarkKey key = testKey();
  const SeriesTensor x = randomTensor(3, 10, 4, 3);
  CHECK(countDiffs(minmax_insert_attack(x, 0.0, key, 0), x) == 0);

  for (const double p : {0.2, 0.5, 0.9}) {
    const SeriesTensor out = minmax_insert_attack(x, p, key, 5);
    const auto k = static_cast<std::size_t>(std::floor(p * 10));
    for (std::size_t b = 0; b < x.batch(); ++b) {
      for (std::size_t f = 0; f < x.features(); ++f) {
        double lo = x.at(b, 0, f), hi = lo;
        std::size_t replaced = 0;
        for (std::size_t w = 0; w < 10; ++w) {
          lo = std::min(lo, x.at(b, w, f));
          hi = std::max(hi, x.at(b, w, f));
          if (out.at(b, w, f) != x.at(b, w, f)) ++replaced;
        }
        CHECK(replaced == k);
        for (std::size_t w = 0; w < 10; ++w) {
          CHECK(out.at(b, w, f) >= lo);
          CHECK(out.at(b, w, f) <= hi);
        }
      }
    }
  }
}

TEST_CASE("attacks are deterministic and shape/finiteness preserving") {
  const WatermarkKey key = testKey(0x13);
  const SeriesTensor x = randomTensor(2, 8, 3, 4);
  for (const char* text : {"offset:0.3", "crop:0.4", "minmax:0.5"}) {
    const auto spec = AttackSpec::parse(text);
    const SeriesTensor a = apply_attack(x, spec, key);
    const SeriesTensor b = apply_attack(x, spec, key);
    CHECK(a.sameShape(x));
    CHECK(countDiffs(a, b) == 0);
    a.requireFinite("attack output");
  }
}

TEST_CASE("reconstruction attack at T=2 runs one noising and one denoising step") {
  const std::size_t W = 4, F = 2, d = W * F;
  const auto sched = build_schedule(2, ScheduleKind::linear, 0.05, 0.05, 1.0);
  const AnalyticGaussianEstimator est(Eigen::VectorXd::Zero(d),
                                      Eigen::MatrixXd::Identity(d, d), sched);
  const WatermarkKey key = testKey();
  const SeriesTensor x = randomTensor(2, W, F, 6);
  const SeriesTensor out = reconstruction_attack(x, est, sched, key, 0);
  CHECK(out.sameShape(x));
  CHECK(countDiffs(out, x) == x.size());
  const SeriesTensor out2 = reconstruction_attack(x, est, sched, key, 0);
  CHECK(countDiffs(out, out2) == 0);
}

TEST_CASE("watermark survives reconstruction qualitatively") {
  const std::size_t W = 8, F = 4, d = W * F;
  const auto sched = build_schedule(30, ScheduleKind::linear, 1e-3, 0.03, 1.0);
  const AnalyticGaussianEstimator est(Eigen::VectorXd::Zero(d),
                                      ar1_covariance(W, F, 0.6), sched);
  EmbedParams params;
  params.window = W;
  params.features = F;
  params.key = testKey(0x21);

  const auto [noise, seeds] = embed(params, 40);
  const SeriesTensor x0 = bdia_sample(noise, est, sched).states[0];
  const SeriesTensor recon = reconstruction_attack(x0, est, sched, params.key, 1);

  const SeriesTensor x0_nw =
      bdia_sample(randomTensor(40, W, F, 7), est, sched).states[0];
  const auto acc_nw = detection_accuracies(x0_nw, params.key, params, est, sched,
                                           DetectionMode::blind);
  const auto acc_clean = detection_accuracies(x0, params.key, params, est, sched,
                                              DetectionMode::blind);
  const auto acc_recon = detection_accuracies(recon, params.key, params, est, sched,
                                              DetectionMode::blind);
  const double z_clean = z_score(acc_clean, acc_nw).z;
  const double z_recon = z_score(acc_recon, acc_nw).z;
  CHECK(z_recon > 0.0);
  CHECK(z_clean >= z_recon);
}

TEST_CASE("crop degradation is monotone in strength (statistical)") {
  const std::size_t W = 16, F = 6, d = W * F;
  const auto sched = build_schedule(20, ScheduleKind::linear, 1e-3, 0.02, 1.0);
  const AnalyticGaussianEstimator est(Eigen::VectorXd::Zero(d),
                                      ar1_covariance(W, F, 0.7), sched);
  EmbedParams params;
  params.window = W;
  params.features = F;
  params.key = testKey(0x37);

  const auto [noise, seeds] = embed(params, 120);
  const SeriesTensor x0 = bdia_sample(noise, est, sched).states[0];
  auto meanAcc = [&](const SeriesTensor& batch) {
    const auto acc = detection_accuracies(batch, params.key, params, est, sched,
                                          DetectionMode::blind);
    double m = 0.0, v = 0.0;
    for (double a : acc) m += a;
    m /= static_cast<double>(acc.size());
    for (double a : acc) v += (a - m) * (a - m);
    v /= static_cast<double>(acc.size() - 1);
    return std::pair<double, double>{m, std::sqrt(v / double(acc.size()))};
  };
  const auto [m_clean, se_clean] = meanAcc(x0);
  const auto [m_p05, se_p05] = meanAcc(crop_attack(x0, 0.05, params.key, 11));
  const auto [m_p30, se_p30] = meanAcc(crop_attack(x0, 0.30, params.key, 12));
  CHECK(m_p30 <= m_p05 + 3.0 * std::hypot(se_p30, se_p05));
  CHECK(m_p05 <= m_clean + 3.0 * std::hypot(se_p05, se_clean));
  CHECK(m_p30 < m_clean);
}
