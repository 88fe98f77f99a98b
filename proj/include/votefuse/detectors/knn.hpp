#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "votefuse/detectors/types.hpp"

namespace votefuse::detectors::knn {

// Nearest-neighbour reconstruction in window space. Each window's last row is rebuilt as
// the mean last row of its k nearest (Euclidean) reference windows. Reference windows are
// an evenly strided subset of the training windows, capped at `max_reference`.

struct Reference {
  Eigen::MatrixXd windows;          // d x R
  std::vector<std::size_t> source;  // training window index of each reference column
};

inline Reference select_reference(const Eigen::MatrixXd& train_windows, std::size_t cap) {
  const auto n = static_cast<std::size_t>(train_windows.cols());
  const std::size_t stride = std::max<std::size_t>(1, (n + cap - 1) / cap);
  Reference ref;
  for (std::size_t j = 0; j < n; j += stride) ref.source.push_back(j);
  ref.windows.resize(train_windows.rows(), static_cast<Eigen::Index>(ref.source.size()));
  for (std::size_t i = 0; i < ref.source.size(); ++i)
    ref.windows.col(static_cast<Eigen::Index>(i)) = train_windows.col(static_cast<Eigen::Index>(ref.source[i]));
  return ref;
}

/// Reconstructs the last m rows of each query window. When `exclude` is non-empty,
/// exclude[q] names a reference column that query q may not use (leave-one-out).
inline Eigen::MatrixXd reconstruct_windows(const Eigen::MatrixXd& reference, const Eigen::MatrixXd& queries,
                                           std::size_t k, Eigen::Index m,
                                           const std::vector<std::size_t>& exclude = {}) {
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  const auto r = reference.cols();
  const Eigen::VectorXd ref_norm = reference.colwise().squaredNorm().transpose();
  const Eigen::MatrixXd ref_last = reference.bottomRows(m);
  Eigen::MatrixXd out(m, queries.cols());
  std::vector<std::pair<double, Eigen::Index>> dist(static_cast<std::size_t>(r));
  constexpr Eigen::Index chunk = 256;
  for (Eigen::Index start = 0; start < queries.cols(); start += chunk) {
    const auto count = std::min(chunk, queries.cols() - start);
    const Eigen::MatrixXd q = queries.middleCols(start, count);
    const Eigen::MatrixXd dots = reference.transpose() * q;  // R x count
    const Eigen::RowVectorXd q_norm = q.colwise().squaredNorm();
    for (Eigen::Index c = 0; c < count; ++c) {
      const auto qi = static_cast<std::size_t>(start + c);
      const std::size_t skip = exclude.empty() ? none : exclude[qi];
      std::size_t used = 0;
      for (Eigen::Index j = 0; j < r; ++j) {
        if (static_cast<std::size_t>(j) == skip) continue;
        dist[used++] = {ref_norm(j) + q_norm(c) - 2.0 * dots(j, c), j};
      }
      const auto kk = std::min(k, used);
      std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk),
                        dist.begin() + static_cast<std::ptrdiff_t>(used));
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(m);
      for (std::size_t i = 0; i < kk; ++i) acc += ref_last.col(dist[i].second);
      out.col(start + c) = acc / static_cast<double>(kk);
    }
  }
  return out;
}

/// Fits the reference set and returns the leave-one-out training reconstruction.
inline Reconstruction fit(const DetectorSpec& spec, const TimeSeries& train, Parameters& params) {
  const auto w = static_cast<std::size_t>(spec.hyper.window);
  const auto m = static_cast<Eigen::Index>(train.cols());
  const Eigen::MatrixXd windows = window_matrix(train, w);
  Reference ref = select_reference(windows, static_cast<std::size_t>(spec.hyper.max_reference));
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> exclude(static_cast<std::size_t>(windows.cols()), none);
  for (std::size_t i = 0; i < ref.source.size(); ++i) exclude[ref.source[i]] = i;
  Eigen::MatrixXd rows =
      reconstruct_windows(ref.windows, windows, static_cast<std::size_t>(spec.hyper.neighbors), m, exclude);
  params = {{"reference", to_block(ref.windows)}};
  return {w - 1, std::move(rows)};
}

inline Reconstruction reconstruct(const DetectorSpec& spec, const Parameters& params, const TimeSeries& series) {
  const auto w = static_cast<std::size_t>(spec.hyper.window);
  const auto m = static_cast<Eigen::Index>(series.cols());
  const Eigen::MatrixXd windows = window_matrix(series, w);
  if (windows.cols() == 0) return {w - 1, Eigen::MatrixXd(m, 0)};
  const Eigen::MatrixXd reference = as_matrix(require(params, "reference"));
  return {w - 1, reconstruct_windows(reference, windows, static_cast<std::size_t>(spec.hyper.neighbors), m)};
}

}  // namespace votefuse::detectors::knn
