#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <cstdint>
#include <memory>
#include <string>

#include "twk/prf.hpp"
#include "twk/schedule.hpp"
#include "twk/tensor.hpp"

namespace twk {

/// Noise-estimator interface: predicts the noise component of a diffusion
/// state. Implementations must be deterministic per (x, t) and immutable
/// after construction.
class NoiseEstimator {
 public:
  virtual ~NoiseEstimator() = default;
  /// Flattened sample dimension (window * features) this estimator expects.
  virtual std::size_t dim() const = 0;
  /// Batched estimate; output has the shape of `x`. t is in [1, T].
  virtual SeriesTensor estimate(const SeriesTensor& x, std::size_t t) const = 0;
};

/// Closed-form Bayes-optimal noise estimator for Gaussian-distributed data
/// x0 ~ N(mu, Sigma), standing in for a trained network at desk scale.
/// With abar = alpha_bar[t] the estimate reduces to
///   eps_hat(x, t) = Q diag(sqrt(1-abar) / (abar*lambda + 1-abar)) Q^T (x - sqrt(abar)*mu)
/// where Sigma = Q diag(lambda) Q^T, computed once at construction.
class AnalyticGaussianEstimator : public NoiseEstimator {
 public:
  /// Throws std::invalid_argument if Sigma is not symmetric or its smallest
  /// eigenvalue is <= 1e-9.
  AnalyticGaussianEstimator(Eigen::VectorXd mean, Eigen::MatrixXd covariance,
                            NoiseSchedule schedule);

  /// Fits mean and covariance from a batch of samples (ridge added to the
  /// diagonal keeps the covariance positive definite).
  static AnalyticGaussianEstimator fromSamples(const SeriesTensor& data,
                                               NoiseSchedule schedule,
                                               double ridge = 1e-6);

  std::size_t dim() const override { return static_cast<std::size_t>(mean_.size()); }
  SeriesTensor estimate(const SeriesTensor& x, std::size_t t) const override;

  /// Draws n samples from N(mu, Sigma) as an n x W x F tensor.
  SeriesTensor sampleData(std::size_t n, std::size_t window, std::size_t features,
                          const Prf& prf, std::uint64_t tag) const;

  /// Eigenvalues of d(eps_hat)/dx at step t; the largest is the exact
  /// spectral Lipschitz constant of this linear estimator.
  Eigen::VectorXd slopeEigenvalues(std::size_t t) const;

  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& covariance() const { return covariance_; }
  const NoiseSchedule& schedule() const { return schedule_; }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd covariance_;
  NoiseSchedule schedule_;
  Eigen::MatrixXd basis_;        // Q
  Eigen::VectorXd eigenvalues_;  // lambda
};

/// Affine map per step read from a TWLE file, so externally trained toy
/// models can be plugged in: eps_hat(x, t) = A_t x + c_t.
class LoadedLinearEstimator : public NoiseEstimator {
 public:
  LoadedLinearEstimator(std::vector<Eigen::MatrixXd> matrices,
                        std::vector<Eigen::VectorXd> biases);

  /// TWLE binary format: magic "TWLE", u32 T, u32 d, then T blocks of a
  /// d x d row-major f64 matrix followed by a d-vector bias, little-endian.
  static LoadedLinearEstimator load(const std::string& path);
  void save(const std::string& path) const;

  std::size_t steps() const { return matrices_.size(); }
  std::size_t dim() const override {
    return static_cast<std::size_t>(matrices_.empty() ? 0 : matrices_[0].rows());
  }
  SeriesTensor estimate(const SeriesTensor& x, std::size_t t) const override;

 private:
  std::vector<Eigen::MatrixXd> matrices_;
  std::vector<Eigen::VectorXd> biases_;
};

/// AR(1)-structured covariance over the flattened (w, f) index: correlation
/// phi^|w-w'| along time, independent across features.
Eigen::MatrixXd ar1_covariance(std::size_t window, std::size_t features, double phi);

/// Standard normal tensor with entries drawn from the PRF stream at
/// (tag, b, w, f). Deterministic in (prf, tag).
SeriesTensor standard_normal_tensor(std::size_t batch, std::size_t window,
                                    std::size_t features, const Prf& prf,
                                    std::uint64_t tag);

}  // namespace twk
