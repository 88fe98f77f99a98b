#pragma once

#include <Eigen/Dense>

#include "votefuse/detectors/types.hpp"

namespace votefuse::detectors::moving_average {

// Causal short-memory model: each row is predicted by the mean of the `window` rows before
// it. Nothing is learned beyond the window length.

inline Reconstruction reconstruct(const DetectorSpec& spec, const TimeSeries& series) {
  const auto w = static_cast<std::size_t>(spec.hyper.window);
  const auto m = static_cast<Eigen::Index>(series.cols());
  const auto n = series.rows();
  if (n <= w) return {n, Eigen::MatrixXd(m, 0)};
  const Eigen::MatrixXd x = column_matrix(series);
  Eigen::MatrixXd out(m, static_cast<Eigen::Index>(n - w));
  for (std::size_t t = w; t < n; ++t)
    out.col(static_cast<Eigen::Index>(t - w)) =
        x.middleCols(static_cast<Eigen::Index>(t - w), static_cast<Eigen::Index>(w)).rowwise().mean();
  return {w, std::move(out)};
}

}  // namespace votefuse::detectors::moving_average
