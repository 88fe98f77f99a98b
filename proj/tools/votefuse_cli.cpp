// votefuse command line: run | fit | score | fuse | report
//
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 internal error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "votefuse/votefuse.hpp"

namespace fs = std::filesystem;
using namespace votefuse;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string fixture_votes;
  std::string fixture_mae;
  std::vector<std::string> overrides;
  bool serial = false;
};

pipeline::PipelineConfig resolve_config(const Options& o) {
  if (o.config.empty()) throw ConfigError("--config is required");
  auto cfg = pipeline::load_config(o.config);
  bool panel_from_overrides = false;
  for (const auto& kv : o.overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    auto key = kv.substr(0, eq);
    if (key.rfind("detector.", 0) == 0) panel_from_overrides = true;
    pipeline::apply_setting(cfg, key, kv.substr(eq + 1), panel_from_overrides);
  }
  if (o.seed) cfg.seed = *o.seed;
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (o.serial) cfg.parallel = false;
  if (!o.fixture_mae.empty()) {
    cfg.fixture_mae = o.fixture_mae;
    cfg.mae_source = pipeline::MaeSource::fixture_file;
  }
  pipeline::validate_for_run(cfg);
  return cfg;
}

void print_counts(const pipeline::AnomalyReport& r, const fs::path& dir) {
  const auto& f = r.fusion;
  std::cout << "N_a=" << f.n_a << " N_b.1=" << f.n_b1 << " N_b.2a=" << f.n_b2a << " N_b.2b=" << f.n_b2b
            << " N_b=" << f.n_b << " N=" << f.n << "\nreport written to " << dir.string() << '\n';
}

int cmd_run(const Options& o) {
  const auto cfg = resolve_config(o);
  const auto artifacts = pipeline::run_pipeline(cfg);
  const auto models = fs::path(cfg.output_dir) / "models";
  pipeline::stage("save models", [&] {
    pipeline::save_models(models, artifacts.stats, artifacts.panel);
    return 0;
  });
  try {
    pipeline::emit_report(artifacts.report, cfg.output_dir);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(models, ec);
    throw;
  }
  print_counts(artifacts.report, cfg.output_dir);
  return 0;
}

int cmd_fit(const Options& o) {
  const auto cfg = resolve_config(o);
  const auto data = pipeline::prepare(cfg);
  const auto panel = pipeline::fit_panel(cfg, data);
  const fs::path out(cfg.output_dir);
  pipeline::save_models(out / "models", data.stats, panel);
  fs::create_directories(out / "loss");
  for (const auto& d : panel) {
    std::cout << d.spec.name << " (" << detectors::to_string(d.spec.kind) << "): test mae " << d.mae << '\n';
    if (d.loss_history.train.empty()) continue;
    std::ofstream tr(out / "loss" / (d.spec.name + "_train.csv"));
    detectors::write_loss_csv(tr, d.loss_history.train);
    std::ofstream va(out / "loss" / (d.spec.name + "_validation.csv"));
    detectors::write_loss_csv(va, d.loss_history.validation);
  }
  std::cout << "models written to " << (out / "models").string() << '\n';
  return 0;
}

int cmd_score(const Options& o) {
  const auto cfg = resolve_config(o);
  const fs::path out(cfg.output_dir);
  const auto models = pipeline::stage("load models", [&] { return pipeline::load_models(out / "models"); });
  const auto data = pipeline::prepare(cfg, &models.stats);
  const auto scored = pipeline::score_panel(cfg, data, models.panel);
  fs::create_directories(out / "scores");
  for (std::size_t i = 0; i < models.panel.size(); ++i) {
    std::ofstream csv(out / "scores" / (models.panel[i].spec.name + ".csv"));
    csv.precision(17);
    csv << "timestamp,score,label\n";
    const auto& s = scored.scores[i];
    for (std::size_t r = 0; r < s.scores.size(); ++r)
      csv << format_timestamp(s.timestamps[r]) << ',' << s.scores[r] << ',' << int(scored.labels[i].labels[r]) << '\n';
    std::cout << models.panel[i].spec.name << ": " << scored.labels[i].count() << " of " << s.scores.size()
              << " instants above threshold " << scored.thresholds[i] << '\n';
  }
  return 0;
}

int cmd_fuse(const Options& o) {
  if (o.fixture_votes.empty() || o.fixture_mae.empty())
    throw ConfigError("fuse needs --fixture-votes and --fixture-mae");
  const fs::path out(o.out.empty() ? "out" : o.out);
  auto report = pipeline::run_fixture(o.fixture_votes, o.fixture_mae, o.seed.value_or(0));
  pipeline::emit_report(report, out);
  print_counts(report, out);
  return 0;
}

int cmd_report(const Options& o) {
  const fs::path out(o.out.empty() ? "out" : o.out);
  auto report = pipeline::load_report((out / "report.json").string());
  std::cout << pipeline::summary_text(report);
  return 0;
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::usage: return 1;
    case ErrorKind::data: return 2;
    case ErrorKind::internal: return 3;
  }
  return 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"votefuse: heterogeneous anomaly detectors with dual ensemble voting fusion"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", o.config, "key=value configuration file");
    if (needs_config) c->required();
    sub->add_option("--seed", o.seed, "pipeline seed (overrides the config)");
    sub->add_option("--out", o.out, "output directory (overrides the config)");
    sub->add_option("--fixture-mae", o.fixture_mae, "model,mae list used for fusion weights");
    sub->add_option("--set", o.overrides, "extra key=value setting; repeatable");
    sub->add_flag("--serial", o.serial, "fit and score detectors one at a time");
  };
  auto* run = app.add_subcommand("run", "end-to-end: ingest, fit the panel, score, fuse, report");
  add_common(run, true);
  auto* fit = app.add_subcommand("fit", "fit the detector panel and save it under <out>/models");
  add_common(fit, true);
  auto* score = app.add_subcommand("score", "score with saved models from <out>/models");
  add_common(score, true);
  auto* fuse = app.add_subcommand("fuse", "fixture mode: fuse a vote table with an mae list");
  add_common(fuse, false);
  fuse->add_option("--fixture-votes", o.fixture_votes, "vote table (timestamp + one 0/1 column per model)");
  auto* report = app.add_subcommand("report", "print the summary of <out>/report.json");
  report->add_option("--out", o.out, "directory holding report.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*run) return cmd_run(o);
    if (*fit) return cmd_fit(o);
    if (*score) return cmd_score(o);
    if (*fuse) return cmd_fuse(o);
    if (*report) return cmd_report(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
  return 3;
}
