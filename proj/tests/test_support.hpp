#pragma once

// Shared fixtures for the test binaries: a seeded synthetic sensor generator with spike and
// level-shift injectors, and small helpers for building series in memory.

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "votefuse/fusion/fixture.hpp"
#include "votefuse/random.hpp"
#include "votefuse/timeseries.hpp"

namespace votefuse::testing {

inline constexpr std::int64_t base_ms = 1'600'000'000'000;  // 2020-09-13

inline TimeSeries make_series(const std::vector<std::vector<double>>& rows, std::int64_t step_ms = 1000,
                              std::vector<std::string> channels = {}) {
  const auto m = rows.empty() ? channels.size() : rows.front().size();
  if (channels.empty())
    for (std::size_t c = 0; c < m; ++c) channels.push_back("c" + std::to_string(c));
  std::vector<Timestamp> ts;
  std::vector<double> vals;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    ts.push_back(Timestamp{base_ms + static_cast<std::int64_t>(r) * step_ms});
    vals.insert(vals.end(), rows[r].begin(), rows[r].end());
  }
  return {std::move(ts), std::move(channels), std::move(vals)};
}

struct SyntheticSpec {
  std::size_t rows = 10'000;
  std::size_t channels = 3;
  double period = 50.0;      // samples per cycle
  double noise = 0.1;        // noise std relative to unit amplitude
  std::size_t spikes = 0;
  double spike_sigmas = 10.0;
  std::size_t spike_region_start = 0;  // spikes go in [max(start, period), rows - period)
  std::size_t level_shift_start = 0;
  std::size_t level_shift_length = 0;
  double level_shift = 0.0;
  std::uint64_t seed = 7;
  std::int64_t step_ms = 1000;
};

struct Synthetic {
  TimeSeries series;
  std::vector<std::size_t> spike_rows;  // ground truth, ascending
};

/// Phase-shifted sinusoids plus Gaussian noise. Spikes add spike_sigmas * (channel std) to a
/// random channel at distinct rows at least one period apart and away from the edges (and
/// not before spike_region_start).
inline Synthetic make_synthetic(const SyntheticSpec& spec) {
  Rng rng(spec.seed);
  constexpr double two_pi = 6.283185307179586476925286766559;
  std::vector<double> vals(spec.rows * spec.channels);
  for (std::size_t r = 0; r < spec.rows; ++r)
    for (std::size_t c = 0; c < spec.channels; ++c) {
      const double phase = two_pi * static_cast<double>(c) / static_cast<double>(spec.channels + 1);
      vals[r * spec.channels + c] =
          std::sin(two_pi * static_cast<double>(r) / spec.period + phase) + spec.noise * rng.normal();
    }
  const double channel_std = std::sqrt(0.5 + spec.noise * spec.noise);
  Synthetic out;
  const auto gap = static_cast<std::size_t>(spec.period);
  while (out.spike_rows.size() < spec.spikes) {
    const auto lo = std::max(gap, spec.spike_region_start);
    const auto row = lo + rng.below(spec.rows - gap - lo);
    bool clash = false;
    for (auto s : out.spike_rows) clash = clash || (row + gap > s && s + gap > row);
    if (clash) continue;
    out.spike_rows.push_back(row);
    const auto c = rng.below(spec.channels);
    vals[row * spec.channels + c] += spec.spike_sigmas * channel_std;
  }
  std::sort(out.spike_rows.begin(), out.spike_rows.end());
  for (std::size_t r = spec.level_shift_start; r < spec.level_shift_start + spec.level_shift_length; ++r)
    for (std::size_t c = 0; c < spec.channels; ++c) vals[r * spec.channels + c] += spec.level_shift;

  std::vector<Timestamp> ts;
  std::vector<std::string> names;
  for (std::size_t r = 0; r < spec.rows; ++r) ts.push_back(Timestamp{base_ms + static_cast<std::int64_t>(r) * spec.step_ms});
  for (std::size_t c = 0; c < spec.channels; ++c) names.push_back("sensor_" + std::to_string(c));
  out.series = TimeSeries(std::move(ts), std::move(names), std::move(vals));
  return out;
}

inline void write_csv_file(const std::filesystem::path& path, const TimeSeries& s) {
  std::ofstream out(path);
  write_csv(out, s);
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("votefuse_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
  std::filesystem::path path_;
};

inline std::string fixture_path(const std::string& name) {
  return std::string(VOTEFUSE_DATA_DIR) + "/fixtures/" + name;
}

/// Cooling-system fixture mae values in model order AE, VAE, CAE, LSTM-AE, LSTM-VAE.
inline const std::vector<double> cooling_mae{0.43, 0.453, 0.007, 0.116, 0.484};

/// Expected stage-B verdicts per method, keyed by row.
struct ExpectedVerdicts {
  std::vector<Timestamp> timestamps;
  std::vector<std::uint8_t> majority, weighted, rank;
};

inline ExpectedVerdicts load_expected(const std::string& name) {
  std::ifstream in(fixture_path(name));
  std::string line;
  std::getline(in, line);
  ExpectedVerdicts out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = votefuse::detail::split_csv_line(line, ',');
    out.timestamps.push_back(*parse_timestamp(cells.at(0)));
    out.majority.push_back(static_cast<std::uint8_t>(std::stoi(cells.at(1))));
    out.weighted.push_back(static_cast<std::uint8_t>(std::stoi(cells.at(2))));
    out.rank.push_back(static_cast<std::uint8_t>(std::stoi(cells.at(3))));
  }
  return out;
}

}  // namespace votefuse::testing
