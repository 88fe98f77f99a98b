#pragma once

#include <Eigen/Dense>

#include "votefuse/detectors/types.hpp"

namespace votefuse::detectors::pca {

// Closed-form low-rank reconstruction of sliding windows:
//   x_hat = mu + V V^T (x - mu)
// with V the leading `latent` eigenvectors of the population covariance of training windows.

inline void fit(const DetectorSpec& spec, const TimeSeries& train, Parameters& params) {
  const Eigen::MatrixXd x = window_matrix(train, static_cast<std::size_t>(spec.hyper.window));
  const Eigen::VectorXd mean = x.rowwise().mean();
  const Eigen::MatrixXd centered = x.colwise() - mean;
  const Eigen::MatrixXd cov = centered * centered.transpose() / static_cast<double>(x.cols());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw DataError("detector '" + spec.name + "': eigendecomposition failed");
  const auto latent = static_cast<Eigen::Index>(spec.hyper.latent);
  // Eigenvalues come back ascending; keep the largest `latent`, largest first.
  Eigen::MatrixXd components = eig.eigenvectors().rightCols(latent).rowwise().reverse();
  params = {{"mean", to_block(mean)}, {"components", to_block(components)}};
}

inline Reconstruction reconstruct(const DetectorSpec& spec, const Parameters& params, const TimeSeries& series) {
  const auto window = static_cast<std::size_t>(spec.hyper.window);
  const auto m = static_cast<Eigen::Index>(series.cols());
  const Eigen::VectorXd mean = as_vector(require(params, "mean"));
  const Eigen::MatrixXd v = as_matrix(require(params, "components"));
  const Eigen::MatrixXd x = window_matrix(series, window);
  if (x.cols() == 0) return {window - 1, Eigen::MatrixXd(m, 0)};
  const Eigen::MatrixXd centered = x.colwise() - mean;
  const Eigen::MatrixXd out = (v * (v.transpose() * centered)).colwise() + mean;
  return {window - 1, out.bottomRows(m)};
}

}  // namespace votefuse::detectors::pca
