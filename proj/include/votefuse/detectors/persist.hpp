#pragma once

#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "votefuse/detectors/types.hpp"
#include "votefuse/error.hpp"

namespace votefuse::detectors {

inline constexpr const char* detector_format = "votefuse-detector";
inline constexpr int detector_format_version = 1;

/// Self-describing JSON document for a fitted detector. Doubles are written with
/// round-trip precision, so a reloaded detector scores bit-identically.
inline nlohmann::json to_json(const FittedDetector& d) {
  using nlohmann::json;
  const auto& h = d.spec.hyper;
  json params = json::object();
  for (const auto& [name, block] : d.parameters) params[name] = {{"shape", block.shape}, {"values", block.values}};
  return {
      {"format", detector_format},
      {"version", detector_format_version},
      {"spec",
       {{"name", d.spec.name},
        {"kind", std::string(to_string(d.spec.kind))},
        {"seed", d.spec.seed},
        {"hyperparameters",
         {{"window", h.window},
          {"latent", h.latent},
          {"neighbors", h.neighbors},
          {"period", h.period},
          {"max_reference", h.max_reference},
          {"learning_rate", h.learning_rate},
          {"batch_size", h.batch_size},
          {"max_epochs", h.max_epochs},
          {"patience", h.patience}}}}},
      {"channels", d.channels},
      {"parameters", params},
      {"train_error_stats",
       {{"mean", d.train_error_stats.mean},
        {"std", d.train_error_stats.std_dev},
        {"sorted", d.train_error_stats.sorted}}},
      {"loss_history",
       {{"train", d.loss_history.train},
        {"validation", d.loss_history.validation},
        {"best_epoch", d.loss_history.best_epoch}}},
      {"mae", d.mae},
  };
}

inline FittedDetector from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != detector_format) throw DataError("not a detector file");
    const int version = j.at("version").get<int>();
    if (version != detector_format_version)
      throw DataError("detector file version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(detector_format_version) + ")");
    FittedDetector d;
    const auto& spec = j.at("spec");
    d.spec.name = spec.at("name").get<std::string>();
    auto kind = parse_kind(spec.at("kind").get<std::string>());
    if (!kind) throw DataError("unknown detector kind '" + spec.at("kind").get<std::string>() + "'");
    d.spec.kind = *kind;
    d.spec.seed = spec.at("seed").get<std::uint64_t>();
    const auto& h = spec.at("hyperparameters");
    d.spec.hyper.window = h.at("window").get<int>();
    d.spec.hyper.latent = h.at("latent").get<int>();
    d.spec.hyper.neighbors = h.at("neighbors").get<int>();
    d.spec.hyper.period = h.at("period").get<int>();
    d.spec.hyper.max_reference = h.at("max_reference").get<int>();
    d.spec.hyper.learning_rate = h.at("learning_rate").get<double>();
    d.spec.hyper.batch_size = h.at("batch_size").get<int>();
    d.spec.hyper.max_epochs = h.at("max_epochs").get<int>();
    d.spec.hyper.patience = h.at("patience").get<int>();
    d.channels = j.at("channels").get<std::vector<std::string>>();
    for (const auto& [name, block] : j.at("parameters").items()) {
      ParameterBlock b{block.at("shape").get<std::vector<std::size_t>>(),
                       block.at("values").get<std::vector<double>>()};
      std::size_t expected = 1;
      for (auto s : b.shape) expected *= s;
      if (expected != b.values.size()) throw DataError("parameter block '" + name + "' has inconsistent shape");
      d.parameters.emplace(name, std::move(b));
    }
    const auto& st = j.at("train_error_stats");
    d.train_error_stats.mean = st.at("mean").get<double>();
    d.train_error_stats.std_dev = st.at("std").get<double>();
    d.train_error_stats.sorted = st.at("sorted").get<std::vector<double>>();
    const auto& lh = j.at("loss_history");
    d.loss_history.train = lh.at("train").get<std::vector<double>>();
    d.loss_history.validation = lh.at("validation").get<std::vector<double>>();
    d.loss_history.best_epoch = lh.at("best_epoch").get<std::size_t>();
    d.mae = j.at("mae").get<double>();
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed detector file: ") + e.what());
  }
}

inline void save_detector(const FittedDetector& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write detector file '" + path + "'");
  out << to_json(d).dump(1) << '\n';
  if (!out) throw DataError("failed writing detector file '" + path + "'");
}

inline FittedDetector load_detector(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open detector file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("detector file '" + path + "': " + e.what());
  }
  try {
    return from_json(j);
  } catch (const DataError& e) {
    throw DataError("detector file '" + path + "': " + e.what());
  }
}

/// Two-column (epoch, loss) CSV, epochs 1-based.
inline void write_loss_csv(std::ostream& out, const std::vector<double>& losses) {
  std::ostringstream cell;
  cell.precision(17);
  out << "epoch,loss\n";
  for (std::size_t i = 0; i < losses.size(); ++i) {
    cell.str("");
    cell << losses[i];
    out << (i + 1) << ',' << cell.str() << '\n';
  }
}

}  // namespace votefuse::detectors
