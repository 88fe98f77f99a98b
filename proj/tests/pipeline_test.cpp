#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "test_support.hpp"
#include "votefuse/votefuse.hpp"

using namespace votefuse;
using namespace votefuse::pipeline;
using votefuse::testing::fixture_path;
using votefuse::testing::make_synthetic;
using votefuse::testing::TempDir;

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t data_rows(const fs::path& csv) {
  std::istringstream in(slurp(csv));
  std::string line;
  std::size_t n = 0;
  std::getline(in, line);
  while (std::getline(in, line)) n += line.empty() ? 0 : 1;
  return n;
}

const char* small_panel =
    "detector.ae.kind = window-linear-autoencoder\n"
    "detector.ae.window = 6\n"
    "detector.ae.latent = 3\n"
    "detector.ae.max_epochs = 60\n"
    "detector.pca.kind = pca-reconstructor\n"
    "detector.pca.window = 6\n"
    "detector.pca.latent = 3\n"
    "detector.seasonal.kind = seasonal-residual\n"
    "detector.seasonal.period = 50\n"
    "detector.ma.kind = moving-average-residual\n"
    "detector.ma.window = 4\n"
    "detector.knn.kind = knn-distance\n"
    "detector.knn.window = 6\n";

// Writes a seeded synthetic series and a config pointing at it.
fs::path write_case(const TempDir& dir, const std::string& tag, const votefuse::testing::SyntheticSpec& spec,
                    const std::string& extra = "") {
  const auto csv = dir / (tag + ".csv");
  votefuse::testing::write_csv_file(csv, make_synthetic(spec).series);
  const auto cfg = dir / (tag + ".cfg");
  std::ofstream out(cfg);
  out << "# synthetic case\ninput = " << csv.string() << "\noutput = " << (dir / (tag + "_out")).string() << "\n"
      << "threshold_floor_quantile = 0.999\n"
      << small_panel << extra;
  return cfg;
}

int run_cli(const std::string& args, std::string* output = nullptr) {
  TempDir capture("cli");
  const auto log = capture / "out.txt";
  const std::string cmd = std::string(VOTEFUSE_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  if (output) *output = slurp(log);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, DefaultsAndOverrides) {
  std::istringstream empty("");
  auto d = parse_config(empty);
  EXPECT_EQ(d.panel.size(), 5u);
  EXPECT_EQ(d.seed, 42u);
  EXPECT_EQ(d.threshold, detectors::ThresholdRule::sigma(3.0));
  EXPECT_EQ(d.effective_target(), Target::test);

  std::istringstream in(
      "input = data.csv   # trailing comment\n"
      "resample_interval = 5s\n"
      "train_fraction = 0.7\n"
      "validation_start = 2020-01-01 00:00:00\n"
      "validation_end = 2020-01-02 00:00:00\n"
      "threshold = quantile:0.995\n"
      "seed = 7\n"
      "parallel = false\n"
      "detector.only.kind = knn-distance\n"
      "detector.only.neighbors = 4\n");
  auto c = parse_config(in);
  EXPECT_EQ(c.input, "data.csv");
  EXPECT_EQ(c.resample_interval->ms, 5000);
  EXPECT_EQ(c.split.train_fraction, 0.7);
  EXPECT_EQ(c.effective_target(), Target::validation);
  EXPECT_EQ(c.threshold, detectors::ThresholdRule::at_quantile(0.995));
  EXPECT_EQ(c.seed, 7u);
  EXPECT_FALSE(c.parallel);
  ASSERT_EQ(c.panel.size(), 1u);
  EXPECT_EQ(c.panel[0].kind, detectors::DetectorKind::knn_distance);
  EXPECT_EQ(c.panel[0].hyper.neighbors, 4);
  EXPECT_NO_THROW(validate(c));
}

TEST(Config, ErrorsNameTheLine) {
  auto fails = [](const std::string& text, const std::string& fragment) {
    std::istringstream in(text);
    try {
      auto cfg = parse_config(in, "cfg");
      validate(cfg);
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
      return;
    }
    ADD_FAILURE() << "no error for: " << text;
  };
  fails("\n\nbogus = 1\n", "cfg:3: config: unknown key 'bogus'");
  fails("no equals sign\n", "cfg:1");
  fails("threshold = median\n", "threshold must be");
  fails("seed = -1\n", "seed");
  fails("train_fraction = 1.5\n", "train_fraction");
  fails("target = validation\n", "validation_start");
  fails("detector.x.kind = forest\n", "unknown detector kind");
  fails("detector.x.depth = 3\n", "unknown detector field");
  fails("mae_source = fixture-file\n", "fixture_mae");
  fails("resample_interval = soon\n", "resample_interval");
}

TEST(Config, CanonicalHashIgnoresOutputAndTracksSettings) {
  std::istringstream a("output = one\n"), b("output = two\n"), c("seed = 1\n");
  const auto ha = fnv1a_hex(canonical(parse_config(a)));
  EXPECT_EQ(ha, fnv1a_hex(canonical(parse_config(b))));
  EXPECT_NE(ha, fnv1a_hex(canonical(parse_config(c))));
  EXPECT_EQ(ha.size(), 16u);
}

TEST(Run, SyntheticEndToEndIsConsistent) {
  TempDir dir("run");
  auto spec = votefuse::testing::SyntheticSpec{.rows = 3000, .spikes = 4, .seed = 21};
  auto cfg = load_config(write_case(dir, "s", spec, "target = all\n").string());
  validate(cfg);
  const auto truth = make_synthetic(spec);
  const auto report = run(cfg);
  const auto& f = report.fusion;
  EXPECT_EQ(report.mode, "pipeline");
  EXPECT_EQ(report.detectors.size(), 5u);
  EXPECT_EQ(f.n, f.n_a + f.n_b);
  EXPECT_EQ(f.final_set.size(), f.n);
  EXPECT_EQ(report.scored_instants, 3000u - 5u);  // longest warm-up is window 6
  const auto& ts = truth.series.timestamps();
  for (auto t : f.final_set) {
    EXPECT_TRUE(std::binary_search(ts.begin(), ts.end(), t));
    EXPECT_GE(t, *report.first_scored);
    EXPECT_LE(t, *report.last_scored);
  }
  std::size_t covered = 0;
  for (auto row : truth.spike_rows) covered += std::binary_search(f.final_set.begin(), f.final_set.end(), ts[row]);
  EXPECT_GE(covered, 3u);
}

TEST(Run, TargetRestrictsScoredInstants) {
  TempDir dir("target");
  auto cfg = load_config(write_case(dir, "s", {.rows = 2000, .seed = 22}).string());
  const auto report = run(cfg);
  EXPECT_EQ(report.scored_instants, 400u);  // test split = last 20%
  EXPECT_EQ(*report.first_scored, Timestamp{votefuse::testing::base_ms + 1600 * 1000});
}

TEST(Run, ResamplingPathRuns) {
  TempDir dir("resample");
  auto cfg = load_config(write_case(dir, "s", {.rows = 2000, .seed = 23}, "resample_interval = 2s\n").string());
  const auto report = run(cfg);
  EXPECT_EQ(report.scored_instants, 200u);
}

TEST(Run, DeterministicReportsSerialAndParallel) {
  TempDir dir("det");
  auto cfg = load_config(write_case(dir, "s", {.rows = 2500, .spikes = 3, .seed = 24}).string());
  std::vector<std::string> dumps;
  for (bool parallel : {false, true, false, true}) {
    cfg.parallel = parallel;
    const auto out = dir / ("r" + std::to_string(dumps.size()));
    emit_report(run(cfg), out);
    dumps.push_back(slurp(out / "report.json"));
  }
  for (const auto& d : dumps) EXPECT_EQ(d, dumps.front());
}

TEST(Run, StageErrorsKeepKindAndName) {
  TempDir dir("stage");
  PipelineConfig cfg;
  cfg.panel = default_panel();
  cfg.input = (dir / "bad.csv").string();
  std::ofstream(cfg.input) << "timestamp,a\n2020-01-01 00:00:00,x\n";
  try {
    run(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::data);
    EXPECT_NE(std::string(e.what()).find("stage 'load'"), std::string::npos) << e.what();
  }
  cfg.input = "/nonexistent/input.csv";
  try {
    run(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::usage);
    EXPECT_NE(std::string(e.what()).find("does not exist"), std::string::npos) << e.what();
  }
  cfg.input = (dir / "bad.csv").string();
  cfg.panel.clear();
  try {
    run(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::usage);
    EXPECT_NE(std::string(e.what()).find("stage 'config'"), std::string::npos);
  }
}

TEST(Run, FixtureMaeOverridesTestMae) {
  TempDir dir("fixmae");
  const auto mae = dir / "mae.csv";
  std::ofstream(mae) << "model,mae\nae,0.1\npca,0.2\nseasonal,0.3\nma,0.4\nknn,0.5\n";
  auto cfg = load_config(write_case(dir, "s", {.rows = 1500, .seed = 25}, "mae_source = fixture-file\nfixture_mae = " + mae.string() + "\n").string());
  const auto report = run(cfg);
  EXPECT_EQ(report.fusion.weights.mae, (std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5}));
  EXPECT_EQ(report.fusion.weights.rank, (std::vector<int>{5, 4, 3, 2, 1}));
}

TEST(Fixture, CoolingRunAndEmittedFiles) {
  TempDir dir("fixture");
  const auto report = run_fixture(fixture_path("cooling_votes.csv"), fixture_path("cooling_mae.csv"));
  EXPECT_EQ(report.fusion.n_a, 6u);
  EXPECT_EQ(report.fusion.n_b, 4u);
  EXPECT_EQ(report.fusion.n, 10u);
  const auto files = emit_report(report, dir.path());
  EXPECT_EQ(files.size(), 8u);
  EXPECT_EQ(data_rows(dir / "anomalies_consensus.csv"), 6u);
  EXPECT_EQ(data_rows(dir / "anomalies_majority.csv"), 4u);
  EXPECT_EQ(data_rows(dir / "anomalies_weighted.csv"), 4u);
  EXPECT_EQ(data_rows(dir / "anomalies_rank.csv"), 4u);
  EXPECT_EQ(data_rows(dir / "anomalies_final.csv"), 10u);
  EXPECT_EQ(data_rows(dir / "stage_b_votes.csv"), 16u);
  EXPECT_NE(slurp(dir / "summary.txt").find("N = N_a + N_b = 6 + 4 = 10"), std::string::npos) << slurp(dir / "summary.txt");
  EXPECT_NE(slurp(dir / "anomalies_final.csv").find("2020-12-09 10:02:00.702,consensus\n"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / ".staging"));
}

TEST(Report, EmptyFusionWritesHeaderOnlyCsvs) {
  TempDir dir("empty");
  LabelSeries none{{{0}, {1000}}, {0, 0}};
  AnomalyReport r;
  r.mode = "fixture";
  r.fusion = fusion::dual_fusion({none, none, none}, {"a", "b", "c"}, std::vector<double>{0.1, 0.2, 0.3});
  emit_report(r, dir.path());
  for (auto name : {"consensus", "majority", "weighted", "rank"})
    EXPECT_EQ(slurp(dir / ("anomalies_" + std::string(name) + ".csv")), "timestamp\n");
  EXPECT_EQ(slurp(dir / "anomalies_final.csv"), "timestamp,methods\n");
  EXPECT_TRUE(fs::exists(dir / "report.json"));
  EXPECT_TRUE(fs::exists(dir / "summary.txt"));
  EXPECT_EQ(report_from_json(to_json(r)), r);
}

TEST(Report, JsonRoundTrip) {
  TempDir dir("roundtrip");
  auto fixture = run_fixture(fixture_path("cooling_votes_weighted_view.csv"), fixture_path("cooling_mae.csv"), 5);
  EXPECT_EQ(report_from_json(to_json(fixture)), fixture);
  auto cfg = load_config(write_case(dir, "s", {.rows = 1500, .spikes = 2, .seed = 26}).string());
  auto piped = run(cfg);
  ASSERT_FALSE(piped.detectors.front().loss_history.train.empty());
  emit_report(piped, dir / "out");
  EXPECT_EQ(load_report((dir / "out" / "report.json").string()), piped);
  EXPECT_TRUE(fs::exists(dir / "out" / "loss" / "ae_train.csv"));
  EXPECT_TRUE(fs::exists(dir / "out" / "loss" / "ae_validation.csv"));
  EXPECT_FALSE(fs::exists(dir / "out" / "loss" / "pca_train.csv"));
}

TEST(Report, MalformedJsonIsADataError) {
  TempDir dir("badjson");
  std::ofstream(dir / "report.json") << "{\"format\": \"votefuse-report\"";
  EXPECT_THROW(load_report((dir / "report.json").string()), DataError);
  std::ofstream(dir / "other.json") << "{\"format\": \"something-else\", \"version\": 1}";
  EXPECT_THROW(load_report((dir / "other.json").string()), DataError);
}

TEST(Report, UnwritableDirectoryNamesThePath) {
  TempDir dir("unwritable");
  const auto blocker = dir / "file";
  std::ofstream(blocker) << "x";
  try {
    emit_report(AnomalyReport{}, blocker / "sub");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find(blocker.string()), std::string::npos) << e.what();
  }
}

TEST(Models, SavedPanelScoresLikeInMemoryPanel) {
  TempDir dir("models");
  auto cfg = load_config(write_case(dir, "a", {.rows = 1500, .seed = 27}).string());
  const auto prepared = prepare(cfg);
  const auto panel = fit_panel(cfg, prepared);
  save_models(dir / "models", prepared.stats, panel);
  const auto loaded = load_models(dir / "models");
  EXPECT_EQ(loaded.stats, prepared.stats);
  ASSERT_EQ(loaded.panel.size(), panel.size());
  auto other = make_synthetic({.rows = 600, .spikes = 2, .seed = 28}).series;
  const auto normalized = zscore_apply(other, prepared.stats);
  for (std::size_t i = 0; i < panel.size(); ++i) {
    EXPECT_EQ(loaded.panel[i], panel[i]);
    EXPECT_EQ(detectors::score(loaded.panel[i], normalized), detectors::score(panel[i], normalized));
  }
}

TEST(Cli, CrossProcessModelsMatchInMemoryFit) {
  TempDir dir("crossrun");
  const auto cfg_path = write_case(dir, "a", {.rows = 1500, .seed = 29});
  const auto out = dir / "cli_out";
  ASSERT_EQ(run_cli("fit --config " + cfg_path.string() + " --out " + out.string()), 0);
  const auto from_disk = load_models(out / "models");

  auto cfg = load_config(cfg_path.string());
  const auto prepared = prepare(cfg);
  const auto in_memory = fit_panel(cfg, prepared);
  const auto run_b = zscore_apply(make_synthetic({.rows = 700, .spikes = 3, .seed = 30}).series, prepared.stats);
  ASSERT_EQ(from_disk.panel.size(), in_memory.size());
  for (std::size_t i = 0; i < in_memory.size(); ++i)
    EXPECT_EQ(detectors::score(from_disk.panel[i], run_b), detectors::score(in_memory[i], run_b)) << i;
  EXPECT_TRUE(fs::exists(out / "loss" / "ae_train.csv"));
}

TEST(Cli, SubcommandsAndExitCodes) {
  TempDir dir("cli");
  const auto cfg_path = write_case(dir, "a", {.rows = 1500, .spikes = 2, .seed = 31});
  const auto out = dir / "run_out";
  std::string text;

  EXPECT_EQ(run_cli("run --config " + cfg_path.string() + " --out " + out.string() + " --seed 9 --serial", &text), 0) << text;
  EXPECT_TRUE(fs::exists(out / "report.json"));
  EXPECT_TRUE(fs::exists(out / "models" / "panel.txt"));
  EXPECT_EQ(load_report((out / "report.json").string()).seed, 9u);

  EXPECT_EQ(run_cli("score --config " + cfg_path.string() + " --out " + out.string(), &text), 0) << text;
  EXPECT_TRUE(fs::exists(out / "scores" / "knn.csv"));

  EXPECT_EQ(run_cli("report --out " + out.string(), &text), 0);
  EXPECT_NE(text.find("N = N_a + N_b"), std::string::npos) << text;

  const auto fused = dir / "fused";
  EXPECT_EQ(run_cli("fuse --fixture-votes " + fixture_path("cooling_votes.csv") + " --fixture-mae " +
                        fixture_path("cooling_mae.csv") + " --out " + fused.string(),
                    &text),
            0);
  EXPECT_NE(text.find("N_a=6"), std::string::npos) << text;
  EXPECT_NE(text.find(" N=10"), std::string::npos) << text;
  EXPECT_EQ(data_rows(fused / "anomalies_consensus.csv"), 6u);

  EXPECT_EQ(run_cli("--bogus"), 1);
  EXPECT_EQ(run_cli(""), 1);
  EXPECT_EQ(run_cli("run"), 1);
  EXPECT_EQ(run_cli("fuse --fixture-votes " + fixture_path("cooling_votes.csv")), 1);
  EXPECT_EQ(run_cli("report --out " + (dir / "nowhere").string()), 2);
}

TEST(Cli, FailClosedLeavesNoReport) {
  TempDir dir("failclosed");
  // Config error: exit 1.
  const auto bad_cfg = dir / "bad.cfg";
  std::ofstream(bad_cfg) << "threshold = sigma:-1\n";
  EXPECT_EQ(run_cli("run --config " + bad_cfg.string() + " --out " + (dir / "o1").string()), 1);
  EXPECT_FALSE(fs::exists(dir / "o1" / "report.json"));

  // Data error in ingestion: exit 2.
  const auto csv = dir / "broken.csv";
  std::ofstream(csv) << "timestamp,a\n2020-01-01 00:00:00,1\n2020-01-01 00:00:00,2\n";
  const auto cfg = dir / "broken.cfg";
  std::ofstream(cfg) << "input = " << csv.string() << "\n";
  std::string text;
  EXPECT_EQ(run_cli("run --config " + cfg.string() + " --out " + (dir / "o2").string(), &text), 2);
  EXPECT_NE(text.find("duplicate timestamp"), std::string::npos) << text;
  EXPECT_FALSE(fs::exists(dir / "o2" / "report.json"));
  EXPECT_FALSE(fs::exists(dir / "o2" / "models"));

  // Data error late in the run (too few rows for the windows): exit 2, no report.
  const auto tiny = dir / "tiny.csv";
  votefuse::testing::write_csv_file(tiny, make_synthetic({.rows = 12, .seed = 32}).series);
  const auto tiny_cfg = dir / "tiny.cfg";
  std::ofstream(tiny_cfg) << "input = " << tiny.string() << "\n";
  EXPECT_EQ(run_cli("run --config " + tiny_cfg.string() + " --out " + (dir / "o3").string()), 2);
  EXPECT_FALSE(fs::exists(dir / "o3" / "report.json"));
}
