#pragma once

#include <algorithm>
#include <filesystem>
#include <future>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "votefuse/detectors/detector.hpp"
#include "votefuse/detectors/persist.hpp"
#include "votefuse/error.hpp"
#include "votefuse/fusion/dual_fusion.hpp"
#include "votefuse/fusion/fixture.hpp"
#include "votefuse/normalize.hpp"
#include "votefuse/pipeline/config.hpp"
#include "votefuse/pipeline/report.hpp"
#include "votefuse/random.hpp"
#include "votefuse/split.hpp"
#include "votefuse/timeseries.hpp"

namespace votefuse::pipeline {

/// Runs `body`, prefixing any failure with the stage name. Errors keep their kind.
template <typename F>
auto stage(const std::string& name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.kind(), "stage '" + name + "': " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorKind::internal, "stage '" + name + "': " + e.what());
  }
}

/// Normalized data and its partitions.
struct Prepared {
  TimeSeries normalized;  // every row, normalized with training statistics
  TimeSeries train;
  TimeSeries test;
  TimeSeries validation;
  NormalizationStats stats;
};

/// `fixed_stats` replaces the training-set fit, e.g. when scoring with a saved model set.
inline Prepared prepare(const PipelineConfig& cfg, const NormalizationStats* fixed_stats = nullptr) {
  TimeSeries raw = stage("load", [&] { return load_csv(cfg.input, cfg.timestamp_column); });
  TimeSeries clean = stage("resample", [&] {
    return cfg.resample_interval ? resample(raw, *cfg.resample_interval) : forward_fill(raw);
  });
  auto parts = stage("split", [&] { return split(clean, cfg.split); });
  Prepared p;
  return stage("normalize", [&] {
    p.stats = fixed_stats ? *fixed_stats : zscore_fit(parts.train);
    p.normalized = zscore_apply(clean, p.stats);
    p.train = zscore_apply(parts.train, p.stats);
    p.test = zscore_apply(parts.test, p.stats);
    p.validation = zscore_apply(parts.validation, p.stats);
    return p;
  });
}

/// Panel specs with per-detector seeds derived from the pipeline seed.
inline std::vector<detectors::DetectorSpec> seeded_panel(const PipelineConfig& cfg) {
  auto panel = cfg.panel;
  for (auto& s : panel) s.seed = derive_seed(cfg.seed, s.name);
  return panel;
}

/// Runs `task(i)` for every i in [0, n), concurrently when `parallel`; results keep index order.
template <typename T, typename Task>
std::vector<T> for_each_detector(std::size_t n, bool parallel, Task task) {
  std::vector<T> out;
  out.reserve(n);
  if (!parallel || n < 2) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(task(i));
    return out;
  }
  std::vector<std::future<T>> jobs;
  for (std::size_t i = 0; i < n; ++i) jobs.push_back(std::async(std::launch::async, task, i));
  std::exception_ptr first_error;
  for (auto& j : jobs) {
    try {
      out.push_back(j.get());
    } catch (...) {
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

inline std::vector<detectors::FittedDetector> fit_panel(const PipelineConfig& cfg, const Prepared& data) {
  const auto panel = seeded_panel(cfg);
  return stage("fit", [&] {
    return for_each_detector<detectors::FittedDetector>(panel.size(), cfg.parallel, [&](std::size_t i) {
      auto fitted = detectors::fit(panel[i], data.train);
      fitted.mae = detectors::evaluate_mae(fitted, data.test);
      return fitted;
    });
  });
}

inline std::vector<double> fusion_mae(const PipelineConfig& cfg, const std::vector<detectors::FittedDetector>& panel) {
  std::vector<std::string> names;
  for (const auto& d : panel) names.push_back(d.spec.name);
  if (cfg.mae_source == MaeSource::fixture_file)
    return stage("weights", [&] { return fusion::mae_for(fusion::load_mae_list(cfg.fixture_mae), names); });
  std::vector<double> mae;
  for (const auto& d : panel) mae.push_back(d.mae);
  return mae;
}

inline TimeSeries target_rows(const PipelineConfig& cfg, const Prepared& data) {
  switch (cfg.effective_target()) {
    case Target::validation: return data.validation;
    case Target::test: return data.test;
    case Target::all: return data.normalized;
  }
  return data.test;
}

struct Scored {
  std::vector<detectors::ScoreSeries> scores;  // restricted to the common scored grid
  std::vector<LabelSeries> labels;
  std::vector<double> thresholds;
};

/// Scores the whole normalized series (windows may reach back before the target rows),
/// keeps the target instants every detector produced a score for, and thresholds them.
inline Scored score_panel(const PipelineConfig& cfg, const Prepared& data,
                          const std::vector<detectors::FittedDetector>& panel) {
  const TimeSeries target = target_rows(cfg, data);
  if (target.empty()) throw Error(ErrorKind::data, "stage 'score': target partition is empty");
  auto full = stage("score", [&] {
    return for_each_detector<detectors::ScoreSeries>(panel.size(), cfg.parallel,
                                                     [&](std::size_t i) { return detectors::score(panel[i], data.normalized); });
  });
  std::set<Timestamp> common(target.timestamps().begin(), target.timestamps().end());
  for (const auto& s : full) {
    std::set<Timestamp> has(s.timestamps.begin(), s.timestamps.end());
    std::erase_if(common, [&](Timestamp t) { return !has.count(t); });
  }
  if (common.empty()) throw Error(ErrorKind::data, "stage 'score': no target instant was scored by every detector");
  Scored out;
  for (std::size_t i = 0; i < panel.size(); ++i) {
    detectors::ScoreSeries restricted;
    restricted.warmup = full[i].warmup;
    for (std::size_t r = 0; r < full[i].timestamps.size(); ++r) {
      if (!common.count(full[i].timestamps[r])) continue;
      restricted.timestamps.push_back(full[i].timestamps[r]);
      restricted.scores.push_back(full[i].scores[r]);
    }
    out.thresholds.push_back(detectors::threshold_value(cfg.threshold, panel[i].train_error_stats));
    out.labels.push_back(detectors::predict_labels(restricted, cfg.threshold, panel[i].train_error_stats));
    out.scores.push_back(std::move(restricted));
  }
  return out;
}

struct RunArtifacts {
  AnomalyReport report;
  std::vector<detectors::FittedDetector> panel;
  NormalizationStats stats;
};

/// load -> resample -> split -> normalize (train statistics) -> fit panel -> test mae ->
/// score target rows -> labels -> dual fusion.
inline RunArtifacts run_pipeline(const PipelineConfig& cfg) {
  stage("config", [&] { validate_for_run(cfg); return 0; });
  Prepared data = prepare(cfg);
  RunArtifacts out;
  out.stats = data.stats;
  out.panel = fit_panel(cfg, data);
  const auto mae = fusion_mae(cfg, out.panel);
  const Scored scored = score_panel(cfg, data, out.panel);

  std::vector<std::string> names;
  for (const auto& d : out.panel) names.push_back(d.spec.name);
  AnomalyReport& r = out.report;
  r.mode = "pipeline";
  r.config_hash = fnv1a_hex(canonical(cfg));
  r.seed = cfg.seed;
  r.fusion = stage("fuse", [&] { return fusion::dual_fusion(scored.labels, names, mae); });
  const auto& grid = scored.labels.front().timestamps;
  r.scored_instants = grid.size();
  r.first_scored = grid.front();
  r.last_scored = grid.back();
  for (std::size_t i = 0; i < out.panel.size(); ++i) {
    const auto& d = out.panel[i];
    r.detectors.push_back({d.spec.name, std::string(detectors::to_string(d.spec.kind)), d.mae, scored.thresholds[i],
                           scored.labels[i].count(), d.loss_history});
  }
  return out;
}

inline AnomalyReport run(const PipelineConfig& cfg) { return run_pipeline(cfg).report; }

/// Fixture mode: label series and mae come from files; no detector is fitted.
inline AnomalyReport run_fixture(const std::string& votes_path, const std::string& mae_path, std::uint64_t seed = 0) {
  auto table = stage("load", [&] { return fusion::load_vote_table(votes_path); });
  auto mae = stage("weights", [&] { return fusion::mae_for(fusion::load_mae_list(mae_path), table.models); });
  AnomalyReport r;
  r.mode = "fixture";
  r.config_hash = fnv1a_hex("fixture\n" + votes_path + "\n" + mae_path + "\n");
  r.seed = seed;
  r.fusion = stage("fuse", [&] { return fusion::dual_fusion(table.labels, table.models, mae); });
  const auto& grid = table.labels.front().timestamps;
  r.scored_instants = grid.size();
  if (!grid.empty()) {
    r.first_scored = grid.front();
    r.last_scored = grid.back();
  }
  return r;
}

// Model directory -----------------------------------------------------------

inline nlohmann::json to_json(const NormalizationStats& s) {
  std::vector<int> flags(s.constant_channel.begin(), s.constant_channel.end());
  return {{"channels", s.channels}, {"mean", s.mean}, {"std", s.std_dev}, {"constant", flags}};
}

inline NormalizationStats stats_from_json(const nlohmann::json& j) {
  try {
    NormalizationStats s;
    s.channels = j.at("channels").get<std::vector<std::string>>();
    s.mean = j.at("mean").get<std::vector<double>>();
    s.std_dev = j.at("std").get<std::vector<double>>();
    for (int f : j.at("constant").get<std::vector<int>>()) s.constant_channel.push_back(f != 0);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed normalization file: ") + e.what());
  }
}

/// Writes <dir>/normalization.json and <dir>/<detector>.json, plus the panel order in
/// <dir>/panel.txt.
inline void save_models(const std::filesystem::path& dir, const NormalizationStats& stats,
                        const std::vector<detectors::FittedDetector>& panel) {
  std::filesystem::create_directories(dir);
  detail::write_file(dir / "normalization.json", to_json(stats).dump(1) + "\n");
  std::string order;
  for (const auto& d : panel) {
    detectors::save_detector(d, (dir / (d.spec.name + ".json")).string());
    order += d.spec.name + "\n";
  }
  detail::write_file(dir / "panel.txt", order);
}

struct ModelSet {
  NormalizationStats stats;
  std::vector<detectors::FittedDetector> panel;
};

inline ModelSet load_models(const std::filesystem::path& dir) {
  ModelSet out;
  std::ifstream stats_in(dir / "normalization.json");
  if (!stats_in) throw DataError("no normalization.json in '" + dir.string() + "'");
  try {
    out.stats = stats_from_json(nlohmann::json::parse(stats_in));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("normalization.json: ") + e.what());
  }
  std::ifstream order(dir / "panel.txt");
  if (!order) throw DataError("no panel.txt in '" + dir.string() + "'");
  std::string name;
  while (std::getline(order, name))
    if (!name.empty()) out.panel.push_back(detectors::load_detector((dir / (name + ".json")).string()));
  if (out.panel.empty()) throw DataError("model directory '" + dir.string() + "' lists no detectors");
  return out;
}

}  // namespace votefuse::pipeline
