#pragma once

#include <algorithm>
#include <filesystem>
#include <cstdint>
#include <cstdio>
#include <iterator>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "votefuse/detectors/spec.hpp"
#include "votefuse/detectors/types.hpp"
#include "votefuse/error.hpp"
#include "votefuse/split.hpp"
#include "votefuse/timestamp.hpp"

namespace votefuse::pipeline {

/// Which rows are scored and fused.
enum class Target { validation, test, all };
enum class MaeSource { test, fixture_file };

struct PipelineConfig {
  std::string input;
  std::string timestamp_column = "timestamp";
  std::optional<Duration> resample_interval;  // none: input is taken as already uniform
  SplitSpec split;
  std::optional<Target> target;  // none: validation when a range is set, else test
  std::vector<detectors::DetectorSpec> panel;
  detectors::ThresholdRule threshold;
  std::uint64_t seed = 42;
  std::string output_dir = "out";
  MaeSource mae_source = MaeSource::test;
  std::string fixture_mae;
  bool parallel = true;

  Target effective_target() const {
    if (target) return *target;
    return split.validation_range ? Target::validation : Target::test;
  }
};

/// One detector of each kind with hyperparameters inside the default sweep ranges.
inline std::vector<detectors::DetectorSpec> default_panel() {
  using detectors::DetectorKind;
  std::vector<detectors::DetectorSpec> panel;
  auto add = [&](std::string name, DetectorKind kind, auto tweak) {
    detectors::DetectorSpec s{std::move(name), kind, {}, 0};
    tweak(s.hyper);
    panel.push_back(std::move(s));
  };
  add("autoencoder", DetectorKind::window_linear_autoencoder, [](auto& h) { h.window = 8; h.latent = 4; });
  add("pca", DetectorKind::pca_reconstructor, [](auto& h) { h.window = 8; h.latent = 4; });
  add("seasonal", DetectorKind::seasonal_residual, [](auto& h) { h.period = 24; });
  add("moving-average", DetectorKind::moving_average_residual, [](auto& h) { h.window = 4; });
  add("knn", DetectorKind::knn_distance, [](auto& h) { h.window = 8; h.neighbors = 5; });
  return panel;
}

inline std::string to_string(Target t) {
  switch (t) {
    case Target::validation: return "validation";
    case Target::test: return "test";
    case Target::all: return "all";
  }
  return "test";
}

inline std::string to_string(MaeSource s) { return s == MaeSource::test ? "test" : "fixture-file"; }

namespace detail {

inline double to_number(const std::string& key, const std::string& value) {
  double v;
  if (!votefuse::detail::parse_double(value, v)) throw ConfigError("config: '" + key + "' expects a number, got '" + value + "'");
  return v;
}

inline std::uint64_t to_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    if (value.empty() || value.front() == '-') throw std::invalid_argument("sign");
    auto v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: '" + key + "' expects an unsigned integer, got '" + value + "'");
  }
}

inline Timestamp to_timestamp(const std::string& key, const std::string& value) {
  auto t = parse_timestamp(value);
  if (!t) throw ConfigError("config: '" + key + "' expects a timestamp, got '" + value + "'");
  return *t;
}

inline bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("config: '" + key + "' expects true/false, got '" + value + "'");
}

}  // namespace detail

/// Applies one key/value setting. Detector keys look like `detector.<name>.<field>`; the
/// first key mentioning a detector name registers it (registration order = panel order).
inline void apply_setting(PipelineConfig& cfg, const std::string& key, const std::string& value,
                          bool& panel_from_config) {
  using namespace detail;
  if (key == "input") cfg.input = value;
  else if (key == "timestamp_column") cfg.timestamp_column = value;
  else if (key == "resample_interval") {
    auto d = parse_duration(value);
    if (!d || d->ms <= 0) throw ConfigError("config: resample_interval must be a positive duration, got '" + value + "'");
    cfg.resample_interval = *d;
  } else if (key == "train_fraction") cfg.split.train_fraction = to_number(key, value);
  else if (key == "validation_start" || key == "validation_end") {
    auto t = to_timestamp(key, value);
    if (!cfg.split.validation_range) cfg.split.validation_range = TimeRange{t, t};
    (key == "validation_start" ? cfg.split.validation_range->first : cfg.split.validation_range->last) = t;
  } else if (key == "target") {
    if (value == "validation") cfg.target = Target::validation;
    else if (value == "test") cfg.target = Target::test;
    else if (value == "all") cfg.target = Target::all;
    else throw ConfigError("config: target must be validation, test or all");
  } else if (key == "threshold") {
    // "sigma:<k>" or "quantile:<q>"
    auto colon = value.find(':');
    auto kind = value.substr(0, colon);
    auto arg = colon == std::string::npos ? std::string() : value.substr(colon + 1);
    const double floor = cfg.threshold.floor_quantile;
    if (kind == "sigma") cfg.threshold = detectors::ThresholdRule::sigma(arg.empty() ? 3.0 : to_number(key, arg));
    else if (kind == "quantile") cfg.threshold = detectors::ThresholdRule::at_quantile(to_number(key, arg));
    else throw ConfigError("config: threshold must be sigma:<k> or quantile:<q>");
    cfg.threshold.floor_quantile = floor;
    cfg.threshold.validate();
  } else if (key == "threshold_floor_quantile") {
    cfg.threshold.floor_quantile = to_number(key, value);
    cfg.threshold.validate();
  } else if (key == "seed") cfg.seed = to_u64(key, value);
  else if (key == "output") cfg.output_dir = value;
  else if (key == "mae_source") {
    if (value == "test") cfg.mae_source = MaeSource::test;
    else if (value == "fixture-file") cfg.mae_source = MaeSource::fixture_file;
    else throw ConfigError("config: mae_source must be test or fixture-file");
  } else if (key == "fixture_mae") cfg.fixture_mae = value;
  else if (key == "parallel") cfg.parallel = to_bool(key, value);
  else if (key.rfind("detector.", 0) == 0) {
    auto rest = key.substr(9);
    auto dot = rest.rfind('.');
    if (dot == std::string::npos || dot == 0) throw ConfigError("config: malformed detector key '" + key + "'");
    auto name = rest.substr(0, dot);
    auto field = rest.substr(dot + 1);
    if (!panel_from_config) {
      cfg.panel.clear();
      panel_from_config = true;
    }
    auto it = std::find_if(cfg.panel.begin(), cfg.panel.end(), [&](const auto& s) { return s.name == name; });
    if (it == cfg.panel.end()) {
      cfg.panel.push_back({name, detectors::DetectorKind::pca_reconstructor, {}, 0});
      it = std::prev(cfg.panel.end());
    }
    if (field == "kind") {
      auto kind = detectors::parse_kind(value);
      if (!kind) throw ConfigError("config: unknown detector kind '" + value + "'");
      it->kind = *kind;
    } else if (!it->hyper.set(field, to_number(key, value))) {
      throw ConfigError("config: unknown detector field '" + field + "'");
    }
  } else {
    throw ConfigError("config: unknown key '" + key + "'");
  }
}

/// Parses `key = value` lines; '#' starts a comment.
inline PipelineConfig parse_config(std::istream& in, const std::string& source = "<config>") {
  PipelineConfig cfg;
  cfg.panel = default_panel();
  bool panel_from_config = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto text = votefuse::detail::trim(line);
    if (text.empty()) continue;
    auto eq = text.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    std::string key(votefuse::detail::trim(text.substr(0, eq)));
    std::string value(votefuse::detail::trim(text.substr(eq + 1)));
    try {
      apply_setting(cfg, key, value, panel_from_config);
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

inline PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return parse_config(in, path);
}

/// Checks cross-field invariants once every override has been applied.
inline void validate(const PipelineConfig& cfg) {
  if (cfg.panel.empty()) throw ConfigError("config: detector panel is empty");
  for (std::size_t i = 0; i < cfg.panel.size(); ++i)
    for (std::size_t j = i + 1; j < cfg.panel.size(); ++j)
      if (cfg.panel[i].name == cfg.panel[j].name) throw ConfigError("config: duplicate detector name '" + cfg.panel[i].name + "'");
  cfg.threshold.validate();
  if (!(cfg.split.train_fraction > 0.0 && cfg.split.train_fraction < 1.0))
    throw ConfigError("config: train_fraction must lie in (0, 1)");
  if (cfg.split.validation_range && cfg.split.validation_range->last < cfg.split.validation_range->first)
    throw ConfigError("config: validation_end precedes validation_start");
  if (cfg.effective_target() == Target::validation && !cfg.split.validation_range)
    throw ConfigError("config: target=validation needs validation_start/validation_end");
  if (cfg.mae_source == MaeSource::fixture_file && cfg.fixture_mae.empty())
    throw ConfigError("config: mae_source=fixture-file needs fixture_mae");
}

/// validate() plus the run-start check that every input path resolves.
inline void validate_for_run(const PipelineConfig& cfg) {
  validate(cfg);
  if (cfg.input.empty()) throw ConfigError("config: input is not set");
  if (!std::filesystem::is_regular_file(cfg.input)) throw ConfigError("config: input '" + cfg.input + "' does not exist");
  if (cfg.mae_source == MaeSource::fixture_file && !std::filesystem::is_regular_file(cfg.fixture_mae))
    throw ConfigError("config: fixture_mae '" + cfg.fixture_mae + "' does not exist");
}

/// Stable text form of every setting that influences results (output paths excluded).
inline std::string canonical(const PipelineConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "input=" << cfg.input << '\n' << "timestamp_column=" << cfg.timestamp_column << '\n';
  os << "resample_interval_ms=" << (cfg.resample_interval ? cfg.resample_interval->ms : 0) << '\n';
  os << "train_fraction=" << cfg.split.train_fraction << '\n';
  if (cfg.split.validation_range)
    os << "validation=" << cfg.split.validation_range->first.ms << ".." << cfg.split.validation_range->last.ms << '\n';
  os << "target=" << to_string(cfg.effective_target()) << '\n';
  os << "threshold=" << (cfg.threshold.kind == detectors::ThresholdRule::Kind::quantile ? "quantile:" : "sigma:")
     << (cfg.threshold.kind == detectors::ThresholdRule::Kind::quantile ? cfg.threshold.quantile : cfg.threshold.k)
     << '\n';
  if (cfg.threshold.floor_quantile > 0.0) os << "threshold_floor_quantile=" << cfg.threshold.floor_quantile << '\n';
  os << "seed=" << cfg.seed << '\n' << "mae_source=" << to_string(cfg.mae_source) << '\n';
  if (cfg.mae_source == MaeSource::fixture_file) os << "fixture_mae=" << cfg.fixture_mae << '\n';
  for (const auto& s : cfg.panel) {
    const auto& h = s.hyper;
    os << "detector=" << s.name << ':' << detectors::to_string(s.kind) << ':' << h.window << ':' << h.latent << ':'
       << h.neighbors << ':' << h.period << ':' << h.max_reference << ':' << h.learning_rate << ':' << h.batch_size
       << ':' << h.max_epochs << ':' << h.patience << '\n';
  }
  return os.str();
}

inline std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace votefuse::pipeline
