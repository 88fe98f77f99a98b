#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "votefuse/detectors/spec.hpp"
#include "votefuse/error.hpp"
#include "votefuse/labels.hpp"
#include "votefuse/timeseries.hpp"

namespace votefuse::detectors {

/// One named learned array. Matrices are stored column-major as Eigen keeps them.
struct ParameterBlock {
  std::vector<std::size_t> shape;
  std::vector<double> values;

  bool operator==(const ParameterBlock&) const = default;
};

using Parameters = std::map<std::string, ParameterBlock>;

inline ParameterBlock to_block(const Eigen::MatrixXd& m) {
  return {{static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())},
          std::vector<double>(m.data(), m.data() + m.size())};
}

inline ParameterBlock to_block(const Eigen::VectorXd& v) {
  return {{static_cast<std::size_t>(v.size())}, std::vector<double>(v.data(), v.data() + v.size())};
}

inline const ParameterBlock& require(const Parameters& p, const std::string& name) {
  auto it = p.find(name);
  if (it == p.end()) throw DataError("detector parameters: missing block '" + name + "'");
  return it->second;
}

inline Eigen::MatrixXd as_matrix(const ParameterBlock& b) {
  if (b.shape.size() != 2 || b.shape[0] * b.shape[1] != b.values.size())
    throw DataError("detector parameters: block is not a matrix");
  return Eigen::Map<const Eigen::MatrixXd>(b.values.data(), static_cast<Eigen::Index>(b.shape[0]),
                                           static_cast<Eigen::Index>(b.shape[1]));
}

inline Eigen::VectorXd as_vector(const ParameterBlock& b) {
  if (b.shape.size() != 1 || b.shape[0] != b.values.size())
    throw DataError("detector parameters: block is not a vector");
  return Eigen::Map<const Eigen::VectorXd>(b.values.data(), static_cast<Eigen::Index>(b.values.size()));
}

/// Per-epoch losses. Empty for closed-form detectors.
struct LossHistory {
  std::vector<double> train;
  std::vector<double> validation;
  std::size_t best_epoch = 0;  // 1-based; 0 when empty

  bool operator==(const LossHistory&) const = default;
};

/// Distribution of per-instance training reconstruction errors.
struct ErrorStats {
  double mean = 0.0;
  double std_dev = 0.0;
  std::vector<double> sorted;

  bool operator==(const ErrorStats&) const = default;
};

inline ErrorStats make_error_stats(std::vector<double> errors) {
  ErrorStats s;
  if (errors.empty()) return s;
  double sum = 0.0;
  for (double e : errors) sum += e;
  s.mean = sum / static_cast<double>(errors.size());
  double ss = 0.0;
  for (double e : errors) ss += (e - s.mean) * (e - s.mean);
  s.std_dev = std::sqrt(ss / static_cast<double>(errors.size()));
  std::sort(errors.begin(), errors.end());
  s.sorted = std::move(errors);
  return s;
}

struct FittedDetector {
  DetectorSpec spec;
  std::vector<std::string> channels;
  Parameters parameters;
  ErrorStats train_error_stats;
  LossHistory loss_history;
  double mae = 0.0;

  bool operator==(const FittedDetector&) const = default;
};

/// Per-instance reconstruction error. Scores attach to the last timestamp of their window;
/// the first `warmup` rows of the scored series have no score.
struct ScoreSeries {
  std::vector<Timestamp> timestamps;
  std::vector<double> scores;
  std::size_t warmup = 0;

  bool operator==(const ScoreSeries&) const = default;
};

struct ThresholdRule {
  enum class Kind { mean_plus_k_sigma, quantile };
  Kind kind = Kind::mean_plus_k_sigma;
  double k = 3.0;
  double quantile = 0.999;
  double floor_quantile = 0.0;  // > 0: the threshold is never below this training-error quantile

  static ThresholdRule sigma(double k) { return {Kind::mean_plus_k_sigma, k, 0.999, 0.0}; }
  static ThresholdRule at_quantile(double q) { return {Kind::quantile, 3.0, q, 0.0}; }

  void validate() const {
    if (!(floor_quantile >= 0.0 && floor_quantile < 1.0)) throw ConfigError("threshold: floor quantile must lie in [0, 1)");
    if (kind == Kind::mean_plus_k_sigma && !(k > 0.0)) throw ConfigError("threshold: k must be > 0");
    if (kind == Kind::quantile && !(quantile > 0.0 && quantile < 1.0))
      throw ConfigError("threshold: quantile must lie in (0, 1)");
  }

  bool operator==(const ThresholdRule&) const = default;
};

using votefuse::LabelSeries;

/// Windows of `w` consecutive rows flattened row-major into columns of a (w*m) x (n-w+1)
/// matrix. Column j is the window ending at row j + w - 1.
inline Eigen::MatrixXd window_matrix(const TimeSeries& series, std::size_t w) {
  const auto n = series.rows();
  const auto m = series.cols();
  if (w == 0 || n < w) return Eigen::MatrixXd(static_cast<Eigen::Index>(w * m), 0);
  const auto count = n - w + 1;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(w * m), static_cast<Eigen::Index>(count));
  const double* base = series.values().data();
  for (std::size_t j = 0; j < count; ++j)
    out.col(static_cast<Eigen::Index>(j)) =
        Eigen::Map<const Eigen::VectorXd>(base + j * m, static_cast<Eigen::Index>(w * m));
  return out;
}

/// Row-per-column view of the whole series: m x n.
inline Eigen::MatrixXd column_matrix(const TimeSeries& series) {
  return Eigen::Map<const Eigen::MatrixXd>(series.values().data(), static_cast<Eigen::Index>(series.cols()),
                                           static_cast<Eigen::Index>(series.rows()));
}

/// Reconstructed values of the scored rows: m x (n - warmup).
struct Reconstruction {
  std::size_t warmup = 0;
  Eigen::MatrixXd rows;
};

}  // namespace votefuse::detectors
