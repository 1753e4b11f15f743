#include "twk/estimator.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "twk/gaussian.hpp"

namespace twk {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstRowMap = Eigen::Map<const RowMat>;
using RowMap = Eigen::Map<RowMat>;

void checkStep(std::size_t t, std::size_t steps) {
  if (t < 1 || t > steps) {
    throw std::invalid_argument("estimator: step index out of range");
  }
}

}  // namespace

AnalyticGaussianEstimator::AnalyticGaussianEstimator(Eigen::VectorXd mean,
                                                     Eigen::MatrixXd covariance,
                                                     NoiseSchedule schedule)
    : mean_(std::move(mean)),
      covariance_(std::move(covariance)),
      schedule_(std::move(schedule)) {
  const auto d = mean_.size();
  if (covariance_.rows() != d || covariance_.cols() != d || d < 1) {
    throw std::invalid_argument("AnalyticGaussianEstimator: shape mismatch");
  }
  if ((covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw std::invalid_argument("AnalyticGaussianEstimator: covariance not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(covariance_);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("AnalyticGaussianEstimator: eigendecomposition failed");
  }
  basis_ = solver.eigenvectors();
  eigenvalues_ = solver.eigenvalues();
  if (eigenvalues_.minCoeff() <= 1e-9) {
    throw std::invalid_argument(
        "AnalyticGaussianEstimator: covariance is numerically singular");
  }
}

AnalyticGaussianEstimator AnalyticGaussianEstimator::fromSamples(
    const SeriesTensor& data, NoiseSchedule schedule, double ridge) {
  const auto B = data.batch();
  const auto d = data.sampleSize();
  if (B < 2) {
    throw std::invalid_argument("fromSamples: need at least two samples");
  }
  ConstRowMap X(data.flat().data(), static_cast<Eigen::Index>(B),
                static_cast<Eigen::Index>(d));
  Eigen::VectorXd mu = X.colwise().mean();
  Eigen::MatrixXd centered = X.rowwise() - mu.transpose();
  Eigen::MatrixXd cov =
      (centered.transpose() * centered) / static_cast<double>(B - 1);
  cov.diagonal().array() += ridge;
  return AnalyticGaussianEstimator(std::move(mu), std::move(cov), std::move(schedule));
}

SeriesTensor AnalyticGaussianEstimator::estimate(const SeriesTensor& x,
                                                 std::size_t t) const {
  checkStep(t, schedule_.steps);
  const auto d = dim();
  if (x.sampleSize() != d) {
    throw std::invalid_argument("AnalyticGaussianEstimator: dimension mismatch");
  }
  const double abar = schedule_.alpha_bar[t];
  Eigen::ArrayXd denom = abar * eigenvalues_.array() + (1.0 - abar);
  if (denom.minCoeff() < 1e-12) {
    throw std::runtime_error("AnalyticGaussianEstimator: singular posterior operator");
  }
  const Eigen::ArrayXd slope = std::sqrt(1.0 - abar) / denom;

  SeriesTensor out(x.batch(), x.window(), x.features());
  ConstRowMap X(x.flat().data(), static_cast<Eigen::Index>(x.batch()),
                static_cast<Eigen::Index>(d));
  RowMap Y(out.flat().data(), static_cast<Eigen::Index>(x.batch()),
           static_cast<Eigen::Index>(d));
  RowMat centered = X.rowwise() - (std::sqrt(abar) * mean_).transpose();
  RowMat z = centered * basis_;
  z.array().rowwise() *= slope.transpose();
  Y = z * basis_.transpose();
  return out;
}

SeriesTensor AnalyticGaussianEstimator::sampleData(std::size_t n, std::size_t window,
                                                   std::size_t features,
                                                   const Prf& prf,
                                                   std::uint64_t tag) const {
  if (window * features != dim()) {
    throw std::invalid_argument("sampleData: shape does not match estimator dim");
  }
  SeriesTensor z = standard_normal_tensor(n, window, features, prf, tag);
  const Eigen::VectorXd scale = eigenvalues_.cwiseSqrt();
  RowMap Z(z.flat().data(), static_cast<Eigen::Index>(n),
           static_cast<Eigen::Index>(dim()));
  RowMat out = (Z * scale.asDiagonal()) * basis_.transpose();
  out.rowwise() += mean_.transpose();
  Z = out;
  return z;
}

Eigen::VectorXd AnalyticGaussianEstimator::slopeEigenvalues(std::size_t t) const {
  checkStep(t, schedule_.steps);
  const double abar = schedule_.alpha_bar[t];
  return (std::sqrt(1.0 - abar) /
          (abar * eigenvalues_.array() + (1.0 - abar)))
      .matrix();
}

LoadedLinearEstimator::LoadedLinearEstimator(std::vector<Eigen::MatrixXd> matrices,
                                             std::vector<Eigen::VectorXd> biases)
    : matrices_(std::move(matrices)), biases_(std::move(biases)) {
  if (matrices_.empty() || matrices_.size() != biases_.size()) {
    throw std::invalid_argument("LoadedLinearEstimator: empty or mismatched blocks");
  }
  const auto d = matrices_[0].rows();
  for (std::size_t i = 0; i < matrices_.size(); ++i) {
    if (matrices_[i].rows() != d || matrices_[i].cols() != d ||
        biases_[i].size() != d) {
      throw std::invalid_argument("LoadedLinearEstimator: inconsistent block shapes");
    }
  }
}

SeriesTensor LoadedLinearEstimator::estimate(const SeriesTensor& x,
                                             std::size_t t) const {
  checkStep(t, matrices_.size());
  const auto d = dim();
  if (x.sampleSize() != d) {
    throw std::invalid_argument("LoadedLinearEstimator: dimension mismatch");
  }
  SeriesTensor out(x.batch(), x.window(), x.features());
  ConstRowMap X(x.flat().data(), static_cast<Eigen::Index>(x.batch()),
                static_cast<Eigen::Index>(d));
  RowMap Y(out.flat().data(), static_cast<Eigen::Index>(x.batch()),
           static_cast<Eigen::Index>(d));
  Y = X * matrices_[t - 1].transpose();
  Y.rowwise() += biases_[t - 1].transpose();
  return out;
}

namespace {

void writeU32(std::ostream& os, std::uint32_t v) {
  std::uint8_t buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<std::uint8_t>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(buf), 4);
}

std::uint32_t readU32(std::istream& is) {
  std::uint8_t buf[4];
  is.read(reinterpret_cast<char*>(buf), 4);
  if (!is) throw std::runtime_error("TWLE: truncated file");
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | buf[i];
  return v;
}

}  // namespace

LoadedLinearEstimator LoadedLinearEstimator::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("TWLE: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "TWLE", 4) != 0) {
    throw std::runtime_error("TWLE: bad magic in " + path);
  }
  const std::uint32_t T = readU32(is);
  const std::uint32_t d = readU32(is);
  if (T < 1 || d < 1) throw std::runtime_error("TWLE: invalid header");
  std::vector<Eigen::MatrixXd> mats;
  std::vector<Eigen::VectorXd> biases;
  mats.reserve(T);
  biases.reserve(T);
  for (std::uint32_t t = 0; t < T; ++t) {
    RowMat A(d, d);
    is.read(reinterpret_cast<char*>(A.data()),
            static_cast<std::streamsize>(sizeof(double) * d * d));
    Eigen::VectorXd c(d);
    is.read(reinterpret_cast<char*>(c.data()),
            static_cast<std::streamsize>(sizeof(double) * d));
    if (!is) throw std::runtime_error("TWLE: truncated file");
    mats.emplace_back(A);
    biases.emplace_back(std::move(c));
  }
  return LoadedLinearEstimator(std::move(mats), std::move(biases));
}

void LoadedLinearEstimator::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("TWLE: cannot write " + path);
  os.write("TWLE", 4);
  writeU32(os, static_cast<std::uint32_t>(matrices_.size()));
  writeU32(os, static_cast<std::uint32_t>(dim()));
  for (std::size_t t = 0; t < matrices_.size(); ++t) {
    const RowMat A = matrices_[t];
    os.write(reinterpret_cast<const char*>(A.data()),
             static_cast<std::streamsize>(sizeof(double) * A.size()));
    os.write(reinterpret_cast<const char*>(biases_[t].data()),
             static_cast<std::streamsize>(sizeof(double) * biases_[t].size()));
  }
  if (!os) throw std::runtime_error("TWLE: write failed for " + path);
}

Eigen::MatrixXd ar1_covariance(std::size_t window, std::size_t features, double phi) {
  if (!(phi > -1.0 && phi < 1.0)) {
    throw std::invalid_argument("ar1_covariance: phi must be in (-1,1)");
  }
  const auto d = static_cast<Eigen::Index>(window * features);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t w = 0; w < window; ++w) {
    for (std::size_t v = 0; v < window; ++v) {
      const double rho = std::pow(phi, std::abs(double(w) - double(v)));
      for (std::size_t f = 0; f < features; ++f) {
        cov(static_cast<Eigen::Index>(w * features + f),
            static_cast<Eigen::Index>(v * features + f)) = rho;
      }
    }
  }
  return cov;
}

SeriesTensor standard_normal_tensor(std::size_t batch, std::size_t window,
                                    std::size_t features, const Prf& prf,
                                    std::uint64_t tag) {
  SeriesTensor out(batch, window, features);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t w = 0; w < window; ++w) {
      for (std::size_t f = 0; f < features; ++f) {
        out.at(b, w, f) = gaussian_ppf(prf.unitOpen(
            {tag, std::uint64_t{b}, std::uint64_t{w}, std::uint64_t{f}}));
      }
    }
  }
  return out;
}

}  // namespace twk
