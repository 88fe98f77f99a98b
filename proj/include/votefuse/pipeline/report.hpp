#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "votefuse/detectors/persist.hpp"
#include "votefuse/detectors/types.hpp"
#include "votefuse/error.hpp"
#include "votefuse/fusion/dual_fusion.hpp"

namespace votefuse::pipeline {

struct DetectorSummary {
  std::string name;
  std::string kind;
  double mae = 0.0;
  double threshold = 0.0;
  std::size_t flagged = 0;
  detectors::LossHistory loss_history;

  bool operator==(const DetectorSummary&) const = default;
};

struct AnomalyReport {
  std::string mode;  // "pipeline" or "fixture"
  std::string config_hash;
  std::uint64_t seed = 0;
  std::size_t scored_instants = 0;
  std::optional<Timestamp> first_scored;
  std::optional<Timestamp> last_scored;
  std::vector<DetectorSummary> detectors;
  fusion::FusionResult fusion;

  bool operator==(const AnomalyReport&) const = default;
};

// JSON encoding -------------------------------------------------------------

namespace json_detail {

using nlohmann::json;

inline json timestamps(const std::vector<Timestamp>& ts) {
  json out = json::array();
  for (auto t : ts) out.push_back(format_timestamp(t));
  return out;
}

inline std::vector<Timestamp> timestamps(const json& j) {
  std::vector<Timestamp> out;
  for (const auto& s : j) {
    auto t = parse_timestamp(s.get<std::string>());
    if (!t) throw DataError("report: bad timestamp '" + s.get<std::string>() + "'");
    out.push_back(*t);
  }
  return out;
}

inline fusion::Method method(const std::string& s) {
  for (auto m : {fusion::Method::consensus, fusion::Method::majority, fusion::Method::weighted, fusion::Method::rank})
    if (fusion::to_string(m) == s) return m;
  throw DataError("report: unknown method '" + s + "'");
}

inline json matrix(const fusion::VoteMatrix& v) {
  json rows = json::array();
  for (std::size_t r = 0; r < v.rows(); ++r) {
    auto row = v.row(r);
    rows.push_back(std::vector<int>(row.begin(), row.end()));
  }
  return {{"models", v.model_names()}, {"candidates", timestamps(v.candidates())}, {"votes", rows}};
}

inline fusion::VoteMatrix matrix(const json& j) {
  std::vector<std::uint8_t> votes;
  for (const auto& row : j.at("votes"))
    for (const auto& v : row) votes.push_back(static_cast<std::uint8_t>(v.get<int>()));
  return {timestamps(j.at("candidates")), j.at("models").get<std::vector<std::string>>(), std::move(votes)};
}

inline json outcome(const fusion::VoteOutcome& o) {
  return {{"count", o.count()}, {"labels", std::vector<int>(o.labels.begin(), o.labels.end())},
          {"flagged", timestamps(o.flagged)}};
}

inline fusion::VoteOutcome outcome(const json& j) {
  fusion::VoteOutcome o;
  for (const auto& v : j.at("labels")) o.labels.push_back(static_cast<std::uint8_t>(v.get<int>()));
  o.flagged = timestamps(j.at("flagged"));
  return o;
}

}  // namespace json_detail

inline nlohmann::json to_json(const AnomalyReport& r) {
  using namespace json_detail;
  const auto& f = r.fusion;
  json dets = json::array();
  for (const auto& d : r.detectors)
    dets.push_back({{"name", d.name},
                    {"kind", d.kind},
                    {"mae", d.mae},
                    {"threshold", d.threshold},
                    {"flagged", d.flagged},
                    {"loss_history",
                     {{"train", d.loss_history.train},
                      {"validation", d.loss_history.validation},
                      {"best_epoch", d.loss_history.best_epoch}}}});
  json prov = json::array();
  for (const auto& p : f.provenance) {
    json methods = json::array();
    for (auto m : p.methods) methods.push_back(std::string(fusion::to_string(m)));
    prov.push_back({{"timestamp", format_timestamp(p.at)}, {"methods", methods}, {"final", p.final}});
  }
  return {
      {"format", "votefuse-report"},
      {"version", 1},
      {"run",
       {{"mode", r.mode},
        {"config_hash", r.config_hash},
        {"seed", r.seed},
        {"scored_instants", r.scored_instants},
        {"first_scored", r.first_scored ? json(format_timestamp(*r.first_scored)) : json(nullptr)},
        {"last_scored", r.last_scored ? json(format_timestamp(*r.last_scored)) : json(nullptr)}}},
      {"detectors", dets},
      {"fusion",
       {{"models", f.models},
        {"weights",
         {{"mae", f.weights.mae},
          {"weight", f.weights.weight},
          {"rank", f.weights.rank},
          {"rank_weight", f.weights.rank_weight}}},
        {"candidates", matrix(f.candidates)},
        {"stage_b", matrix(f.stage_b)},
        {"consensus", outcome(f.consensus)},
        {"majority", outcome(f.majority)},
        {"weighted", outcome(f.weighted)},
        {"rank", outcome(f.rank)},
        {"counts",
         {{"N_a", f.n_a}, {"N_b1", f.n_b1}, {"N_b2a", f.n_b2a}, {"N_b2b", f.n_b2b}, {"N_b", f.n_b}, {"N", f.n}}},
        {"selected", std::string(fusion::to_string(f.selected))},
        {"final", timestamps(f.final_set)},
        {"provenance", prov}}},
  };
}

inline AnomalyReport report_from_json(const nlohmann::json& j) {
  using namespace json_detail;
  try {
    if (j.at("format").get<std::string>() != "votefuse-report") throw DataError("not a report file");
    if (j.at("version").get<int>() != 1) throw DataError("unsupported report version");
    AnomalyReport r;
    const auto& run = j.at("run");
    r.mode = run.at("mode").get<std::string>();
    r.config_hash = run.at("config_hash").get<std::string>();
    r.seed = run.at("seed").get<std::uint64_t>();
    r.scored_instants = run.at("scored_instants").get<std::size_t>();
    if (!run.at("first_scored").is_null()) r.first_scored = timestamps(json::array({run.at("first_scored")})).front();
    if (!run.at("last_scored").is_null()) r.last_scored = timestamps(json::array({run.at("last_scored")})).front();
    for (const auto& d : j.at("detectors")) {
      DetectorSummary s;
      s.name = d.at("name").get<std::string>();
      s.kind = d.at("kind").get<std::string>();
      s.mae = d.at("mae").get<double>();
      s.threshold = d.at("threshold").get<double>();
      s.flagged = d.at("flagged").get<std::size_t>();
      s.loss_history.train = d.at("loss_history").at("train").get<std::vector<double>>();
      s.loss_history.validation = d.at("loss_history").at("validation").get<std::vector<double>>();
      s.loss_history.best_epoch = d.at("loss_history").at("best_epoch").get<std::size_t>();
      r.detectors.push_back(std::move(s));
    }
    const auto& f = j.at("fusion");
    auto& out = r.fusion;
    out.models = f.at("models").get<std::vector<std::string>>();
    out.weights.mae = f.at("weights").at("mae").get<std::vector<double>>();
    out.weights.weight = f.at("weights").at("weight").get<std::vector<double>>();
    out.weights.rank = f.at("weights").at("rank").get<std::vector<int>>();
    out.weights.rank_weight = f.at("weights").at("rank_weight").get<std::vector<double>>();
    out.candidates = matrix(f.at("candidates"));
    out.stage_b = matrix(f.at("stage_b"));
    out.consensus = outcome(f.at("consensus"));
    out.majority = outcome(f.at("majority"));
    out.weighted = outcome(f.at("weighted"));
    out.rank = outcome(f.at("rank"));
    const auto& c = f.at("counts");
    out.n_a = c.at("N_a").get<std::size_t>();
    out.n_b1 = c.at("N_b1").get<std::size_t>();
    out.n_b2a = c.at("N_b2a").get<std::size_t>();
    out.n_b2b = c.at("N_b2b").get<std::size_t>();
    out.n_b = c.at("N_b").get<std::size_t>();
    out.n = c.at("N").get<std::size_t>();
    out.selected = method(f.at("selected").get<std::string>());
    out.final_set = timestamps(f.at("final"));
    for (const auto& p : f.at("provenance")) {
      fusion::Provenance pv;
      pv.at = timestamps(json::array({p.at("timestamp")})).front();
      for (const auto& m : p.at("methods")) pv.methods.push_back(method(m.get<std::string>()));
      pv.final = p.at("final").get<bool>();
      out.provenance.push_back(std::move(pv));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed report: ") + e.what());
  }
}

inline AnomalyReport load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open report '" + path + "'");
  try {
    return report_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("report '" + path + "': " + e.what());
  }
}

// Text outputs --------------------------------------------------------------

inline std::string summary_text(const AnomalyReport& r) {
  const auto& f = r.fusion;
  std::ostringstream os;
  os << "votefuse anomaly report (" << r.mode << ")\n";
  os << "config hash " << r.config_hash << ", seed " << r.seed << '\n';
  os << "scored instants: " << r.scored_instants;
  if (r.first_scored && r.last_scored)
    os << " (" << format_timestamp(*r.first_scored) << " .. " << format_timestamp(*r.last_scored) << ")";
  os << "\n\n";
  if (!r.detectors.empty()) {
    os << "detectors:\n";
    for (const auto& d : r.detectors) {
      char line[256];
      std::snprintf(line, sizeof line, "  %-20s %-26s mae %.6f  threshold %.6f  flagged %zu\n", d.name.c_str(),
                    d.kind.c_str(), d.mae, d.threshold, d.flagged);
      os << line;
    }
    os << '\n';
  }
  os << "weights:\n";
  for (std::size_t j = 0; j < f.models.size(); ++j) {
    char line[256];
    std::snprintf(line, sizeof line, "  %-20s mae %.6f  W %.6f  R %d  RW %.6f\n", f.models[j].c_str(),
                  f.weights.mae[j], f.weights.weight[j], f.weights.rank[j], f.weights.rank_weight[j]);
    os << line;
  }
  os << "\ncounts:\n";
  os << "  N_a   (consensus) = " << f.n_a << '\n';
  os << "  N_b.1 (majority)  = " << f.n_b1 << '\n';
  os << "  N_b.2a (weighted) = " << f.n_b2a << '\n';
  os << "  N_b.2b (rank)     = " << f.n_b2b << '\n';
  os << "  N_b = " << f.n_b << " (" << fusion::to_string(f.selected) << ")\n";
  os << "  N = N_a + N_b = " << f.n_a << " + " << f.n_b << " = " << f.n << "\n\n";
  os << "final anomalies:\n";
  for (const auto& p : f.provenance) {
    if (!p.final) continue;
    os << "  " << format_timestamp(p.at) << "  [";
    for (std::size_t i = 0; i < p.methods.size(); ++i) os << (i ? "," : "") << fusion::to_string(p.methods[i]);
    os << "]\n";
  }
  return os.str();
}

inline void write_timestamp_csv(std::ostream& out, const std::vector<Timestamp>& ts) {
  out << "timestamp\n";
  for (auto t : ts) out << format_timestamp(t) << '\n';
}

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << content;
  out.close();
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

}  // namespace detail

/// Writes summary.txt, report.json, one anomalies_<method>.csv per method plus
/// anomalies_final.csv, stage_b_votes.csv and loss/<detector>_{train,validation}.csv.
/// Files are staged and moved into `dir` only once all of them were written.
inline std::vector<std::filesystem::path> emit_report(const AnomalyReport& report, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  const auto& f = report.fusion;
  std::vector<std::pair<fs::path, std::string>> files;
  auto add = [&](fs::path rel, std::string content) { files.emplace_back(std::move(rel), std::move(content)); };

  add("summary.txt", summary_text(report));
  add("report.json", to_json(report).dump(1) + "\n");
  for (auto m : {fusion::Method::consensus, fusion::Method::majority, fusion::Method::weighted, fusion::Method::rank}) {
    std::ostringstream os;
    write_timestamp_csv(os, f.outcome(m).flagged);
    add("anomalies_" + std::string(fusion::to_string(m)) + ".csv", os.str());
  }
  {
    std::ostringstream os;
    os << "timestamp,methods\n";
    for (const auto& p : f.provenance) {
      if (!p.final) continue;
      os << format_timestamp(p.at) << ',';
      for (std::size_t i = 0; i < p.methods.size(); ++i) os << (i ? ";" : "") << fusion::to_string(p.methods[i]);
      os << '\n';
    }
    add("anomalies_final.csv", os.str());
  }
  {
    std::ostringstream os;
    os << "timestamp";
    for (const auto& m : f.stage_b.model_names()) os << ',' << m;
    os << ",majority,weighted,rank\n";
    for (std::size_t r = 0; r < f.stage_b.rows(); ++r) {
      os << format_timestamp(f.stage_b.candidates()[r]);
      for (auto v : f.stage_b.row(r)) os << ',' << int(v);
      os << ',' << int(f.majority.labels[r]) << ',' << int(f.weighted.labels[r]) << ',' << int(f.rank.labels[r])
         << '\n';
    }
    add("stage_b_votes.csv", os.str());
  }
  for (const auto& d : report.detectors) {
    if (d.loss_history.train.empty()) continue;
    std::ostringstream tr, va;
    detectors::write_loss_csv(tr, d.loss_history.train);
    detectors::write_loss_csv(va, d.loss_history.validation);
    add(fs::path("loss") / (d.name + "_train.csv"), tr.str());
    add(fs::path("loss") / (d.name + "_validation.csv"), va.str());
  }

  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory '" + dir.string() + "': " + ec.message());
  const fs::path staging = dir / ".staging";
  fs::remove_all(staging, ec);
  std::vector<fs::path> written;
  try {
    for (const auto& [rel, content] : files) {
      fs::create_directories((staging / rel).parent_path());
      detail::write_file(staging / rel, content);
    }
    for (const auto& [rel, content] : files) {
      fs::create_directories((dir / rel).parent_path());
      fs::rename(staging / rel, dir / rel);
      written.push_back(dir / rel);
    }
  } catch (const std::exception& e) {
    for (const auto& p : written) fs::remove(p, ec);
    fs::remove_all(staging, ec);
    throw DataError(std::string("emit report: ") + e.what());
  }
  fs::remove_all(staging, ec);
  return written;
}

}  // namespace votefuse::pipeline
