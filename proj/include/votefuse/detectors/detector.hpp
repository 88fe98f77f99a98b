#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "votefuse/detectors/knn.hpp"
#include "votefuse/detectors/linear_autoencoder.hpp"
#include "votefuse/detectors/moving_average.hpp"
#include "votefuse/detectors/pca.hpp"
#include "votefuse/detectors/seasonal.hpp"
#include "votefuse/detectors/spec.hpp"
#include "votefuse/detectors/types.hpp"

namespace votefuse::detectors {

namespace detail {

inline std::size_t min_rows(const DetectorSpec& spec) {
  const auto w = static_cast<std::size_t>(spec.hyper.window);
  switch (spec.kind) {
    case DetectorKind::seasonal_residual: return 1;
    case DetectorKind::moving_average_residual: return w + 1;
    case DetectorKind::knn_distance: return w + static_cast<std::size_t>(spec.hyper.neighbors);
    default: return w;
  }
}

inline Reconstruction reconstruct(const FittedDetector& fitted, const TimeSeries& series) {
  const auto& spec = fitted.spec;
  switch (spec.kind) {
    case DetectorKind::window_linear_autoencoder:
      return linear_autoencoder::reconstruct(spec, fitted.parameters, series);
    case DetectorKind::pca_reconstructor: return pca::reconstruct(spec, fitted.parameters, series);
    case DetectorKind::seasonal_residual: return seasonal::reconstruct(spec, fitted.parameters, series);
    case DetectorKind::moving_average_residual: return moving_average::reconstruct(spec, series);
    case DetectorKind::knn_distance: return knn::reconstruct(spec, fitted.parameters, series);
  }
  throw Error(ErrorKind::internal, "unknown detector kind");
}

/// Mean absolute difference over channels between each scored row and its reconstruction.
inline std::vector<double> row_errors(const TimeSeries& series, const Reconstruction& rec) {
  const auto m = series.cols();
  std::vector<double> out(static_cast<std::size_t>(rec.rows.cols()));
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto row = series.row(rec.warmup + i);
    double acc = 0.0;
    for (std::size_t c = 0; c < m; ++c)
      acc += std::abs(row[c] - rec.rows(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(i)));
    out[i] = acc / static_cast<double>(m);
  }
  return out;
}

}  // namespace detail

/// Fits one detector on (normalized) training rows. Deterministic in (spec.seed, train).
inline FittedDetector fit(const DetectorSpec& spec, const TimeSeries& train,
                          const HyperparameterRanges& ranges = {}) {
  validate(spec, train.cols(), ranges);
  if (train.has_missing()) throw DataError("detector '" + spec.name + "': training data has missing values");
  if (train.rows() < detail::min_rows(spec))
    throw DataError("detector '" + spec.name + "': " + std::to_string(train.rows()) +
                    " training rows, need at least " + std::to_string(detail::min_rows(spec)));
  FittedDetector out;
  out.spec = spec;
  out.channels = train.channels();
  std::vector<double> errors;
  switch (spec.kind) {
    case DetectorKind::window_linear_autoencoder:
      linear_autoencoder::fit(spec, train, out.parameters, out.loss_history);
      break;
    case DetectorKind::pca_reconstructor: pca::fit(spec, train, out.parameters); break;
    case DetectorKind::seasonal_residual: seasonal::fit(spec, train, out.parameters); break;
    case DetectorKind::moving_average_residual: break;
    case DetectorKind::knn_distance:
      errors = detail::row_errors(train, knn::fit(spec, train, out.parameters));
      break;
  }
  if (spec.kind != DetectorKind::knn_distance) errors = detail::row_errors(train, detail::reconstruct(out, train));
  out.train_error_stats = make_error_stats(std::move(errors));
  return out;
}

inline ScoreSeries score(const FittedDetector& fitted, const TimeSeries& series) {
  if (series.channels() != fitted.channels)
    throw DataError("detector '" + fitted.spec.name + "': series channels do not match training channels");
  if (series.has_missing()) throw DataError("detector '" + fitted.spec.name + "': series has missing values");
  const Reconstruction rec = detail::reconstruct(fitted, series);
  ScoreSeries out;
  out.scores = detail::row_errors(series, rec);
  out.warmup = series.rows() - out.scores.size();
  out.timestamps.assign(series.timestamps().begin() + static_cast<std::ptrdiff_t>(out.warmup),
                        series.timestamps().end());
  return out;
}

/// Linear-interpolation quantile of sorted values.
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double threshold_value(const ThresholdRule& rule, const ErrorStats& train_stats) {
  rule.validate();
  const double base = rule.kind == ThresholdRule::Kind::mean_plus_k_sigma
                          ? train_stats.mean + rule.k * train_stats.std_dev
                          : quantile_sorted(train_stats.sorted, rule.quantile);
  if (rule.floor_quantile > 0.0) return std::max(base, quantile_sorted(train_stats.sorted, rule.floor_quantile));
  return base;
}

/// label = 1 iff score > threshold (strict).
inline LabelSeries predict_labels(const ScoreSeries& scores, const ThresholdRule& rule,
                                  const ErrorStats& train_stats) {
  const double limit = threshold_value(rule, train_stats);
  LabelSeries out{scores.timestamps, std::vector<std::uint8_t>(scores.scores.size(), 0)};
  for (std::size_t i = 0; i < scores.scores.size(); ++i) out.labels[i] = scores.scores[i] > limit ? 1 : 0;
  return out;
}

/// Mean per-instance reconstruction error over `test`.
inline double evaluate_mae(const FittedDetector& fitted, const TimeSeries& test) {
  const ScoreSeries s = score(fitted, test);
  if (s.scores.empty())
    throw DataError("detector '" + fitted.spec.name + "': test data is empty after windowing");
  double sum = 0.0;
  for (double v : s.scores) sum += v;
  return sum / static_cast<double>(s.scores.size());
}

/// Picks the grid entry with the lowest mean validation MAE over `folds` forward-chaining
/// folds: rows are cut into folds + 1 contiguous blocks, fold f trains on blocks [0, f) and
/// validates on block f. Ties keep the earlier grid entry.
inline DetectorSpec hyperparameter_sweep(const std::vector<DetectorSpec>& grid, const TimeSeries& train,
                                         int folds, const HyperparameterRanges& ranges = {}) {
  if (grid.empty()) throw ConfigError("hyperparameter_sweep: empty grid");
  if (folds < 2) throw ConfigError("hyperparameter_sweep: folds must be >= 2");
  for (const auto& spec : grid) validate(spec, train.cols(), ranges);
  if (grid.size() == 1) return grid.front();
  const auto block = train.rows() / static_cast<std::size_t>(folds + 1);
  if (block == 0) throw DataError("hyperparameter_sweep: too few rows for the fold count");

  std::size_t best = 0;
  double best_mae = std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double total = 0.0;
    for (int f = 1; f <= folds; ++f) {
      const auto cut = block * static_cast<std::size_t>(f);
      const auto end = f == folds ? train.rows() : cut + block;
      const FittedDetector fitted = fit(grid[g], train.slice(0, cut), ranges);
      total += evaluate_mae(fitted, train.slice(cut, end));
    }
    const double mean = total / folds;
    if (mean < best_mae) {
      best_mae = mean;
      best = g;
    }
  }
  return grid[best];
}

}  // namespace votefuse::detectors
