#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "twk/sampler.hpp"
#include "twk/tensor.hpp"

namespace twk {

struct RealMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  RealMatrix() = default;
  RealMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
};

/// Training-free quality metrics; all are zero when the two datasets agree.
struct QualityReport {
  double correlational = 0.0;
  double mdd = 0.0;  // marginal distribution difference (50-bin histograms)
  double acd = 0.0;  // autocorrelation difference, lags 1..5
  double sd = 0.0;   // skewness difference
  double kd = 0.0;   // excess-kurtosis difference
};

/// Population covariance of features i and j within a single W x F series:
/// (1/W) sum K_i K_j - ((1/W) sum K_i)((1/W) sum K_j).
double covariance(const SeriesTensor& series, std::size_t i, std::size_t j);

/// (1/10) sum_{i,j} |rho_R(i,j) - rho_S(i,j)| over all feature pairs, with
/// covariances averaged over the batch before normalizing. The 1/10
/// prefactor is applied verbatim regardless of F. Throws on zero-variance
/// features.
double correlational_score(const SeriesTensor& real_batch,
                           const SeriesTensor& synth_batch);

struct InversionErrorReport {
  RealMatrix error_time;        // B x F, mean |diff| across timesteps
  RealMatrix error_features;    // B x W, mean |diff| across features
  RealMatrix signed_time;       // same aggregations without the absolute value
  RealMatrix signed_features;
};

InversionErrorReport aggregate_inversion_error(const SeriesTensor& x0_hat,
                                               const SeriesTensor& x0);

/// (avg, max) of per-sample element-wise |x1 - x0| statistics: the average
/// of per-sample means and the maximum of per-sample maxima.
std::pair<double, double> x1_x0_distance(const TrajectoryRecord& traj);

/// MDD / ACD / SD / KD only; the correlational field is left zero.
QualityReport tsg_metrics(const SeriesTensor& real_batch,
                          const SeriesTensor& synth_batch);

/// tsg_metrics plus the correlational score.
QualityReport quality_report(const SeriesTensor& real_batch,
                             const SeriesTensor& synth_batch);

}  // namespace twk
