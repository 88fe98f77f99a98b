#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "votefuse/error.hpp"
#include "votefuse/timeseries.hpp"

namespace votefuse {

/// Per-channel z-score parameters. `std_dev` uses the population formula (divide by N).
struct NormalizationStats {
  std::vector<std::string> channels;
  std::vector<double> mean;
  std::vector<double> std_dev;
  std::vector<bool> constant_channel;

  bool operator==(const NormalizationStats&) const = default;
};

inline NormalizationStats zscore_fit(const TimeSeries& train) {
  if (train.empty()) throw DataError("zscore_fit: empty training series");
  const auto n = train.rows();
  const auto m = train.cols();
  NormalizationStats stats{train.channels(), std::vector<double>(m, 0.0), std::vector<double>(m, 0.0),
                           std::vector<bool>(m, false)};
  for (std::size_t c = 0; c < m; ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) sum += train.at(r, c);
    const double mu = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double d = train.at(r, c) - mu;
      ss += d * d;
    }
    stats.mean[c] = mu;
    stats.std_dev[c] = std::sqrt(ss / static_cast<double>(n));
    stats.constant_channel[c] = stats.std_dev[c] == 0.0;
  }
  return stats;
}

/// (x - mean) / std per cell; constant channels map to 0.
inline TimeSeries zscore_apply(const TimeSeries& series, const NormalizationStats& stats) {
  if (series.channels() != stats.channels)
    throw DataError("zscore_apply: series channels do not match normalization channels");
  const auto m = series.cols();
  std::vector<double> vals(series.values());
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const auto c = i % m;
    vals[i] = stats.constant_channel[c] ? 0.0 : (vals[i] - stats.mean[c]) / stats.std_dev[c];
  }
  return {series.timestamps(), series.channels(), std::move(vals)};
}

}  // namespace votefuse
