#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "votefuse/detectors/types.hpp"

namespace votefuse::detectors::seasonal {

// Per-phase seasonal profile. Each row is reconstructed by the training mean of rows that
// share its phase (sample offset from the training anchor, modulo `period`).

inline double median_step_ms(const TimeSeries& s) {
  if (s.rows() < 2) return 1.0;
  std::vector<std::int64_t> diffs;
  diffs.reserve(s.rows() - 1);
  for (std::size_t i = 1; i < s.rows(); ++i) diffs.push_back(s.timestamps()[i].ms - s.timestamps()[i - 1].ms);
  std::nth_element(diffs.begin(), diffs.begin() + static_cast<std::ptrdiff_t>(diffs.size() / 2), diffs.end());
  return static_cast<double>(diffs[diffs.size() / 2]);
}

inline std::size_t phase_of(Timestamp t, double anchor_ms, double step_ms, int period) {
  const auto offset = std::llround((static_cast<double>(t.ms) - anchor_ms) / step_ms);
  auto p = offset % period;
  if (p < 0) p += period;
  return static_cast<std::size_t>(p);
}

inline void fit(const DetectorSpec& spec, const TimeSeries& train, Parameters& params) {
  const int period = spec.hyper.period;
  const auto m = static_cast<Eigen::Index>(train.cols());
  const double anchor = static_cast<double>(train.timestamps().front().ms);
  const double step = median_step_ms(train);
  Eigen::MatrixXd profile = Eigen::MatrixXd::Zero(m, period);
  std::vector<double> counts(static_cast<std::size_t>(period), 0.0);
  for (std::size_t r = 0; r < train.rows(); ++r) {
    const auto p = phase_of(train.timestamps()[r], anchor, step, period);
    auto row = train.row(r);
    for (Eigen::Index c = 0; c < m; ++c) profile(c, static_cast<Eigen::Index>(p)) += row[static_cast<std::size_t>(c)];
    counts[p] += 1.0;
  }
  for (int p = 0; p < period; ++p)
    if (counts[static_cast<std::size_t>(p)] > 0) profile.col(p) /= counts[static_cast<std::size_t>(p)];
  Eigen::VectorXd timing(2);
  timing << anchor, step;
  params = {{"profile", to_block(profile)}, {"timing", to_block(timing)}};
}

inline Reconstruction reconstruct(const DetectorSpec& spec, const Parameters& params, const TimeSeries& series) {
  const Eigen::MatrixXd profile = as_matrix(require(params, "profile"));
  const Eigen::VectorXd timing = as_vector(require(params, "timing"));
  Eigen::MatrixXd out(static_cast<Eigen::Index>(series.cols()), static_cast<Eigen::Index>(series.rows()));
  for (std::size_t r = 0; r < series.rows(); ++r)
    out.col(static_cast<Eigen::Index>(r)) =
        profile.col(static_cast<Eigen::Index>(phase_of(series.timestamps()[r], timing(0), timing(1), spec.hyper.period)));
  return {0, std::move(out)};
}

}  // namespace votefuse::detectors::seasonal
