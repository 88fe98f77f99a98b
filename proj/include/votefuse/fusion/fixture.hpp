#pragma once

#include <algorithm>
#include <fstream>
#include <istream>
#include <string>
#include <utility>
#include <vector>

#include "votefuse/error.hpp"
#include "votefuse/labels.hpp"
#include "votefuse/timeseries.hpp"

namespace votefuse::fusion {

/// Plain-text vote table: a timestamp column followed by one 0/1 column per model.
///
///   timestamp,AE,VAE,CAE
///   2020-12-09 06:14:11.462,1,0,0
struct VoteTable {
  std::vector<std::string> models;
  std::vector<LabelSeries> labels;  // one per model, sharing the table's timestamps
};

namespace detail {

inline char detect_separator(const std::string& header) {
  return header.find('\t') != std::string::npos && header.find(',') == std::string::npos ? '\t' : ',';
}

}  // namespace detail

inline VoteTable load_vote_table(std::istream& in, const std::string& source = "<stream>") {
  std::string line;
  if (!std::getline(in, line)) throw IngestionError(source + ": empty vote table");
  const char sep = detail::detect_separator(line);
  auto header = votefuse::detail::split_csv_line(line, sep);
  if (header.size() < 2) throw IngestionError(source + ": vote table needs a timestamp and at least one model");
  VoteTable table;
  for (std::size_t c = 1; c < header.size(); ++c) {
    table.models.emplace_back(votefuse::detail::trim(header[c]));
    table.labels.emplace_back();
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (votefuse::detail::trim(line).empty()) continue;
    auto cells = votefuse::detail::split_csv_line(line, sep);
    if (cells.size() != header.size())
      throw IngestionError(source + ": row " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                           " cells, expected " + std::to_string(header.size()));
    auto ts = parse_timestamp(cells[0]);
    if (!ts) throw IngestionError(source + ": row " + std::to_string(line_no) + ": unparseable timestamp");
    if (!table.labels[0].timestamps.empty() && !(table.labels[0].timestamps.back() < *ts))
      throw IngestionError(source + ": row " + std::to_string(line_no) + ": timestamps must be strictly increasing");
    for (std::size_t c = 1; c < cells.size(); ++c) {
      auto v = votefuse::detail::trim(cells[c]);
      if (v != "0" && v != "1")
        throw IngestionError(source + ": row " + std::to_string(line_no) + ", column '" + table.models[c - 1] +
                             "': vote must be 0 or 1");
      table.labels[c - 1].timestamps.push_back(*ts);
      table.labels[c - 1].labels.push_back(v == "1" ? 1 : 0);
    }
  }
  return table;
}

inline VoteTable load_vote_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open vote table '" + path + "'");
  return load_vote_table(in, path);
}

/// "model,mae" rows (header optional).
struct MaeEntry {
  std::string model;
  double mae = 0.0;

  bool operator==(const MaeEntry&) const = default;
};

inline std::vector<MaeEntry> load_mae_list(std::istream& in, const std::string& source = "<stream>") {
  std::vector<MaeEntry> out;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (votefuse::detail::trim(line).empty() || votefuse::detail::trim(line).front() == '#') continue;
    const bool header_allowed = std::exchange(first, false);
    auto cells = votefuse::detail::split_csv_line(line, detail::detect_separator(line));
    if (cells.size() != 2)
      throw IngestionError(source + ": row " + std::to_string(line_no) + ": expected 'model,mae'");
    double v;
    if (!votefuse::detail::parse_double(cells[1], v)) {
      if (header_allowed) continue;
      throw IngestionError(source + ": row " + std::to_string(line_no) + ": non-numeric mae '" + cells[1] + "'");
    }
    out.push_back({std::string(votefuse::detail::trim(cells[0])), v});
  }
  return out;
}

inline std::vector<MaeEntry> load_mae_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open mae list '" + path + "'");
  return load_mae_list(in, path);
}

/// mae values in the order of `models`; every model must be listed.
inline std::vector<double> mae_for(const std::vector<MaeEntry>& entries, const std::vector<std::string>& models) {
  std::vector<double> out;
  for (const auto& m : models) {
    auto it = std::find_if(entries.begin(), entries.end(), [&](const auto& e) { return e.model == m; });
    if (it == entries.end()) throw DataError("mae list has no entry for model '" + m + "'");
    out.push_back(it->mae);
  }
  return out;
}

}  // namespace votefuse::fusion
