#pragma once

#include <cmath>
#include <optional>

#include "votefuse/error.hpp"
#include "votefuse/timeseries.hpp"

namespace votefuse {

/// Closed interval [first, last] of timestamps.
struct TimeRange {
  Timestamp first;
  Timestamp last;

  bool contains(Timestamp t) const noexcept { return first <= t && t <= last; }
  bool operator==(const TimeRange&) const = default;
};

struct SplitSpec {
  double train_fraction = 0.8;
  /// Rows inside this range are held out of both train and test.
  std::optional<TimeRange> validation_range;
};

struct SplitResult {
  TimeSeries train;
  TimeSeries test;
  TimeSeries validation;
};

/// Extracts the validation range first, then splits the remainder chronologically with
/// floor(train_fraction * n) training rows.
inline SplitResult split(const TimeSeries& series, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw DataError("split: train_fraction must lie in (0, 1)");
  auto in_validation = [&](std::size_t r) {
    return spec.validation_range && spec.validation_range->contains(series.timestamps()[r]);
  };
  TimeSeries validation = series.filter_rows(in_validation);
  TimeSeries remainder = series.filter_rows([&](std::size_t r) { return !in_validation(r); });
  const auto n = remainder.rows();
  const auto n_train = static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(n)));
  if (n_train == 0) throw DataError("split: empty training partition");
  if (n_train >= n) throw DataError("split: empty test partition");
  return {remainder.slice(0, n_train), remainder.slice(n_train, n), std::move(validation)};
}

}  // namespace votefuse
