#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "votefuse/error.hpp"
#include "votefuse/timestamp.hpp"

namespace votefuse {

/// Timestamped n x m matrix of sensor readings, stored row-major.
/// Missing cells are NaN until preprocessing removes them.
class TimeSeries {
public:
  TimeSeries() = default;

  TimeSeries(std::vector<Timestamp> timestamps, std::vector<std::string> channels,
             std::vector<double> values)
      : timestamps_(std::move(timestamps)), channels_(std::move(channels)), values_(std::move(values)) {
    if (values_.size() != timestamps_.size() * channels_.size())
      throw DataError("time series: value count does not match rows x channels");
    for (std::size_t i = 1; i < timestamps_.size(); ++i) {
      if (!(timestamps_[i - 1] < timestamps_[i]))
        throw DataError("time series: timestamps not strictly increasing at row " + std::to_string(i));
    }
  }

  std::size_t rows() const noexcept { return timestamps_.size(); }
  std::size_t cols() const noexcept { return channels_.size(); }
  bool empty() const noexcept { return timestamps_.empty(); }

  const std::vector<Timestamp>& timestamps() const noexcept { return timestamps_; }
  const std::vector<std::string>& channels() const noexcept { return channels_; }
  const std::vector<double>& values() const noexcept { return values_; }

  double at(std::size_t row, std::size_t col) const { return values_[row * cols() + col]; }

  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * cols(), cols()};
  }

  bool has_missing() const {
    return std::any_of(values_.begin(), values_.end(), [](double v) { return !std::isfinite(v); });
  }

  /// Rows [first, last).
  TimeSeries slice(std::size_t first, std::size_t last) const {
    std::vector<Timestamp> ts(timestamps_.begin() + first, timestamps_.begin() + last);
    std::vector<double> vals(values_.begin() + first * cols(), values_.begin() + last * cols());
    return {std::move(ts), channels_, std::move(vals)};
  }

  /// Rows whose index satisfies `keep`.
  template <typename Pred>
  TimeSeries filter_rows(Pred keep) const {
    std::vector<Timestamp> ts;
    std::vector<double> vals;
    for (std::size_t r = 0; r < rows(); ++r) {
      if (!keep(r)) continue;
      ts.push_back(timestamps_[r]);
      auto rr = row(r);
      vals.insert(vals.end(), rr.begin(), rr.end());
    }
    return {std::move(ts), channels_, std::move(vals)};
  }

  bool operator==(const TimeSeries& other) const {
    if (timestamps_ != other.timestamps_ || channels_ != other.channels_) return false;
    if (values_.size() != other.values_.size()) return false;
    for (std::size_t i = 0; i < values_.size(); ++i) {
      double a = values_[i], b = other.values_[i];
      if (!(a == b || (std::isnan(a) && std::isnan(b)))) return false;
    }
    return true;
  }

private:
  std::vector<Timestamp> timestamps_;
  std::vector<std::string> channels_;
  std::vector<double> values_;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == sep && !quoted) {
      out.push_back(std::move(cell));
      cell.clear();
    } else if (c != '\r' && c != '\n') {
      cell.push_back(c);
    }
  }
  out.push_back(std::move(cell));
  return out;
}

inline bool parse_double(std::string_view text, double& out) {
  auto s = trim(text);
  if (s.empty()) return false;
  std::string buf(s);
  char* end = nullptr;
  out = std::strtod(buf.c_str(), &end);
  return end == buf.c_str() + buf.size();
}

}  // namespace detail

/// Reads a CSV with a header row. `timestamp_column` names the time column; every other
/// column is a numeric channel. Empty cells load as NaN (missing). Rows are sorted by time.
inline TimeSeries load_csv(std::istream& in, const std::string& timestamp_column,
                           const std::string& source = "<stream>") {
  std::string line;
  if (!std::getline(in, line)) throw IngestionError(source + ": empty file");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // BOM
  auto header = detail::split_csv_line(line);
  for (auto& h : header) h = std::string(detail::trim(h));
  auto ts_it = std::find(header.begin(), header.end(), timestamp_column);
  if (ts_it == header.end())
    throw IngestionError(source + ": timestamp column '" + timestamp_column + "' not found");
  std::size_t ts_col = static_cast<std::size_t>(ts_it - header.begin());
  std::vector<std::string> channels;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (c != ts_col) channels.push_back(header[c]);

  struct Row {
    Timestamp ts;
    std::size_t line_no;
    std::vector<double> vals;
  };
  std::vector<Row> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size())
      throw IngestionError(source + ": row " + std::to_string(line_no) + " has " +
                           std::to_string(cells.size()) + " cells, expected " +
                           std::to_string(header.size()));
    auto ts = parse_timestamp(cells[ts_col]);
    if (!ts)
      throw IngestionError(source + ": row " + std::to_string(line_no) + ": unparseable timestamp '" +
                           cells[ts_col] + "'");
    Row r{*ts, line_no, {}};
    r.vals.reserve(channels.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == ts_col) continue;
      if (detail::trim(cells[c]).empty()) {
        r.vals.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      double v;
      if (!detail::parse_double(cells[c], v))
        throw IngestionError(source + ": row " + std::to_string(line_no) + ", column '" + header[c] +
                             "': non-numeric value '" + cells[c] + "'");
      r.vals.push_back(v);
    }
    rows.push_back(std::move(r));
  }

  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.ts < b.ts; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].ts == rows[i - 1].ts)
      throw IngestionError(source + ": duplicate timestamp " + format_timestamp(rows[i].ts) +
                           " at rows " + std::to_string(rows[i - 1].line_no) + " and " +
                           std::to_string(rows[i].line_no));
  }
  std::vector<Timestamp> ts;
  std::vector<double> vals;
  ts.reserve(rows.size());
  vals.reserve(rows.size() * channels.size());
  for (auto& r : rows) {
    ts.push_back(r.ts);
    vals.insert(vals.end(), r.vals.begin(), r.vals.end());
  }
  return {std::move(ts), std::move(channels), std::move(vals)};
}

inline TimeSeries load_csv(const std::string& path, const std::string& timestamp_column) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open '" + path + "'");
  return load_csv(in, timestamp_column, path);
}

inline void write_csv(std::ostream& out, const TimeSeries& series,
                      const std::string& timestamp_column = "timestamp") {
  out << timestamp_column;
  for (const auto& c : series.channels()) out << ',' << c;
  out << '\n';
  std::ostringstream cell;
  cell.precision(17);
  for (std::size_t r = 0; r < series.rows(); ++r) {
    out << format_timestamp(series.timestamps()[r]);
    for (double v : series.row(r)) {
      out << ',';
      if (std::isfinite(v)) {
        cell.str("");
        cell << v;
        out << cell.str();
      }
    }
    out << '\n';
  }
}

/// Replaces missing cells by the last valid value of the same channel. Leading rows that
/// still hold a missing cell (no earlier value to carry) are dropped.
inline TimeSeries forward_fill(const TimeSeries& series) {
  const auto m = series.cols();
  std::vector<double> last(m, std::numeric_limits<double>::quiet_NaN());
  std::vector<Timestamp> ts;
  std::vector<double> vals;
  for (std::size_t r = 0; r < series.rows(); ++r) {
    auto row = series.row(r);
    bool complete = true;
    for (std::size_t c = 0; c < m; ++c) {
      if (std::isfinite(row[c])) last[c] = row[c];
      complete = complete && std::isfinite(last[c]);
    }
    if (!complete) continue;
    ts.push_back(series.timestamps()[r]);
    vals.insert(vals.end(), last.begin(), last.end());
  }
  return {std::move(ts), series.channels(), std::move(vals)};
}

enum class Aggregator { mean };

/// Buckets rows onto a uniform grid starting at the first timestamp. Each bucket holds the
/// per-channel aggregate of its rows (missing cells ignored); empty buckets and missing
/// aggregates are forward-filled; leading rows with nothing to carry are dropped.
inline TimeSeries resample(const TimeSeries& series, Duration interval,
                           Aggregator aggregator = Aggregator::mean) {
  (void)aggregator;  // mean is the only aggregator
  if (interval.ms <= 0) throw DataError("resample: interval must be positive");
  if (series.empty()) throw DataError("resample: empty series");
  const auto m = series.cols();
  const auto t0 = series.timestamps().front().ms;
  const auto t_last = series.timestamps().back().ms;
  const auto buckets = static_cast<std::size_t>((t_last - t0) / interval.ms) + 1;

  std::vector<double> sum(buckets * m, 0.0);
  std::vector<std::size_t> count(buckets * m, 0);
  for (std::size_t r = 0; r < series.rows(); ++r) {
    auto b = static_cast<std::size_t>((series.timestamps()[r].ms - t0) / interval.ms);
    auto row = series.row(r);
    for (std::size_t c = 0; c < m; ++c) {
      if (!std::isfinite(row[c])) continue;
      sum[b * m + c] += row[c];
      ++count[b * m + c];
    }
  }
  std::vector<Timestamp> ts(buckets);
  std::vector<double> vals(buckets * m);
  for (std::size_t b = 0; b < buckets; ++b) {
    ts[b] = Timestamp{t0 + static_cast<std::int64_t>(b) * interval.ms};
    for (std::size_t c = 0; c < m; ++c) {
      auto n = count[b * m + c];
      vals[b * m + c] = n ? sum[b * m + c] / static_cast<double>(n)
                          : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return forward_fill(TimeSeries(std::move(ts), series.channels(), std::move(vals)));
}

}  // namespace votefuse
