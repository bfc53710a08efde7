#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <vector>

#include "sfw/experiment.hpp"

using namespace sfw;

namespace {

AttackSpec identity_attack() { return AttackSpec{}; }

AttackSpec noise_attack(double sigma) {
  AttackSpec a;
  a.kind = AttackKind::noise;
  a.sigma = sigma;
  return a;
}

ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  cfg.methods = {method_preset("hstr")};
  cfg.attacks = {identity_attack(), noise_attack(0.05)};
  cfg.n_samples = 8;
  cfg.pool_size = 8;
  cfg.seed = 12345;
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("method presets carry the expected switches") {
  MethodConfig tr = method_preset("tree_ring");
  CHECK(tr.spec.kind == WatermarkKind::tree_ring);
  CHECK(tr.spec.region == EmbedRegion::full_frame);
  CHECK_FALSE(tr.noise_key);
  CHECK(tr.det_components == 2);

  MethodConfig tr1 = method_preset("tree_ring_real_only");
  CHECK(tr1.spec.kind == WatermarkKind::tree_ring);
  CHECK(tr1.det_components == 1);

  MethodConfig hs = method_preset("hstr");
  CHECK(hs.spec.kind == WatermarkKind::hstr);
  CHECK(hs.spec.region == EmbedRegion::center_aware);
  CHECK(hs.noise_key);
  CHECK(hs.det_components == 2);

  MethodConfig hq = method_preset("hsqr");
  CHECK(hq.spec.kind == WatermarkKind::hsqr);
  CHECK(hq.spec.region == EmbedRegion::center_aware);
  CHECK(hq.noise_key);

  CHECK_THROWS_AS(method_preset("ring_tree"), std::invalid_argument);
}

TEST_CASE("experiment config validation") {
  ExperimentConfig cfg = tiny_config();
  CHECK_NOTHROW(validate_experiment(cfg));

  ExperimentConfig bad = cfg;
  bad.methods.clear();
  CHECK_THROWS_AS(validate_experiment(bad), std::invalid_argument);

  bad = cfg;
  bad.attacks.clear();
  CHECK_THROWS_AS(validate_experiment(bad), std::invalid_argument);

  bad = cfg;
  bad.n_samples = 0;
  CHECK_THROWS_AS(validate_experiment(bad), std::invalid_argument);

  bad = cfg;
  bad.pool_size = 0;
  CHECK_THROWS_AS(validate_experiment(bad), std::invalid_argument);

  bad = cfg;
  bad.methods[0].det_components = 3;
  CHECK_THROWS_AS(validate_experiment(bad), std::invalid_argument);

  bad = cfg;
  bad.attacks[0].kind = AttackKind::noise;
  bad.attacks[0].sigma = -1.0;
  CHECK_THROWS_AS(validate_experiment(bad), std::invalid_argument);
}

TEST_CASE("experiment config JSON accepts presets and override objects") {
  nlohmann::json j = nlohmann::json::parse(R"({
    "seed": 77,
    "n_samples": 4,
    "pool_size": 16,
    "inversion_noise_sigma": 0.2,
    "methods": [
      "hsqr",
      {"preset": "tree_ring", "det_components": 1, "noise_key": false, "name": "case_b"}
    ],
    "attacks": [
      {"kind": "identity"},
      {"kind": "crop_center", "scale": 0.5}
    ]
  })");

  ExperimentConfig cfg = experiment_config_from_json(j);
  CHECK(cfg.seed == 77);
  CHECK(cfg.n_samples == 4);
  CHECK(cfg.pool_size == 16);
  CHECK(cfg.inversion_noise_sigma == 0.2);
  REQUIRE(cfg.methods.size() == 2);
  CHECK(cfg.methods[0].name == "hsqr");
  CHECK(cfg.methods[1].name == "case_b");
  CHECK(cfg.methods[1].det_components == 1);
  CHECK_FALSE(cfg.methods[1].noise_key);
  REQUIRE(cfg.attacks.size() == 2);
  CHECK(cfg.attacks[1].kind == AttackKind::crop_center);

  // A round trip through the manifest encoding preserves every switch.
  ExperimentConfig back = experiment_config_from_json(experiment_config_to_json(cfg));
  CHECK(back.seed == cfg.seed);
  REQUIRE(back.methods.size() == 2);
  CHECK(back.methods[1].name == "case_b");
  CHECK(back.methods[1].spec.kind == WatermarkKind::tree_ring);
  CHECK(back.methods[1].det_components == 1);
  CHECK(experiment_config_to_json(back) == experiment_config_to_json(cfg));

  CHECK_THROWS_AS(experiment_config_from_json(nlohmann::json::parse("{}")), std::invalid_argument);
  nlohmann::json bad = j;
  bad["methods"] = nlohmann::json::array({42});
  CHECK_THROWS_AS(experiment_config_from_json(bad), std::invalid_argument);
}

TEST_CASE("degenerate single-sample single-key experiment runs") {
  ExperimentConfig cfg;
  cfg.methods = {method_preset("hsqr")};
  cfg.attacks = {identity_attack()};
  cfg.n_samples = 1;
  cfg.pool_size = 1;
  cfg.seed = 5;

  ExperimentResult r = run_experiment(cfg);
  REQUIRE(r.cells.size() == 1);
  const CellResult& c = r.cells[0];
  CHECK(c.method == "hsqr");
  CHECK(c.attack == "identity");
  CHECK(c.n == 1);
  CHECK(c.ident_acc == 1.0);
  CHECK(c.roc.auc == 1.0);  // the single pair must separate
  REQUIRE(c.bit_acc.has_value());
  CHECK(*c.bit_acc == 1.0);
}

TEST_CASE("clean detection separates at small scale for both symmetric schemes") {
  ExperimentConfig cfg;
  cfg.methods = {method_preset("hstr"), method_preset("hsqr")};
  cfg.attacks = {identity_attack()};
  cfg.n_samples = 16;
  cfg.pool_size = 32;
  cfg.seed = 99;

  ExperimentResult r = run_experiment(cfg);
  REQUIRE(r.cells.size() == 2);
  for (const CellResult& c : r.cells) {
    INFO(c.method);
    CHECK(c.ident_acc == 1.0);
    CHECK(c.roc.auc == 1.0);
    CHECK(c.roc.tpr_at_1pct_fpr == 1.0);
    CHECK(c.roc.max_accuracy == 1.0);
  }
  CHECK_FALSE(r.cells[0].bit_acc.has_value());  // hstr row leaves bit accuracy blank
  REQUIRE(r.cells[1].bit_acc.has_value());
  CHECK(*r.cells[1].bit_acc == 1.0);
}

TEST_CASE("experiment outputs are byte-identical across runs and thread counts") {
  ExperimentConfig cfg = tiny_config();

  ExperimentResult first = run_experiment(cfg);
  ExperimentResult second = run_experiment(cfg);
  CHECK(results_csv(first) == results_csv(second));
  CHECK(roc_points_csv(first) == roc_points_csv(second));

  ExperimentConfig threaded = cfg;
  threaded.threads = 3;
  ExperimentResult third = run_experiment(threaded);
  CHECK(results_csv(first) == results_csv(third));
  CHECK(roc_points_csv(first) == roc_points_csv(third));

  // A different master seed shifts the raw score distribution even when the
  // saturated summary metrics agree.
  ExperimentConfig reseeded = cfg;
  reseeded.seed += 1;
  CHECK(roc_points_csv(first) != roc_points_csv(run_experiment(reseeded)));
}

TEST_CASE("csv writers pin the documented shape") {
  ExperimentConfig cfg;
  cfg.methods = {method_preset("hstr"), method_preset("hsqr")};
  cfg.attacks = {identity_attack()};
  cfg.n_samples = 2;
  cfg.pool_size = 2;
  cfg.seed = 3;

  ExperimentResult r = run_experiment(cfg);
  std::string csv = results_csv(r);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "method,attack,tpr_at_1pct_fpr,auc,max_acc,ident_acc,bit_acc,n");

  std::getline(lines, line);
  CHECK(line.substr(0, 14) == "hstr,identity,");
  CHECK(std::count(line.begin(), line.end(), ',') == 7);
  CHECK(line.find(",,") != std::string::npos);  // blank bit_acc column

  std::getline(lines, line);
  CHECK(line.substr(0, 14) == "hsqr,identity,");
  CHECK(line.find(",,") == std::string::npos);
  CHECK(line.back() == '2');

  std::string roc = roc_points_csv(r);
  std::istringstream roc_lines(roc);
  std::getline(roc_lines, line);
  CHECK(line == "method,attack,threshold,fpr,tpr");
  size_t rows = 0;
  while (std::getline(roc_lines, line)) ++rows;
  CHECK(rows == r.cells[0].roc.thresholds.size() + r.cells[1].roc.thresholds.size());
}

TEST_CASE("experiment output files land on disk with a replayable manifest") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "sfw_exp_out_test";
  fs::remove_all(dir);

  ExperimentConfig cfg;
  cfg.methods = {method_preset("hsqr")};
  cfg.attacks = {identity_attack()};
  cfg.n_samples = 2;
  cfg.pool_size = 4;
  cfg.seed = 11;

  ExperimentResult r = run_experiment(cfg);
  write_experiment_outputs(cfg, r, dir, true);

  CHECK(slurp(dir / "results.csv") == results_csv(r));
  CHECK(slurp(dir / "roc_points.csv") == roc_points_csv(r));
  CHECK(slurp(dir / "roc.svg").rfind("<svg", 0) == 0);

  nlohmann::json manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  ExperimentConfig replay = experiment_config_from_json(manifest.at("config"));
  CHECK(replay.seed == cfg.seed);
  CHECK(replay.pool_size == cfg.pool_size);
  REQUIRE(replay.methods.size() == 1);
  CHECK(replay.methods[0].spec.kind == WatermarkKind::hsqr);

  // Replaying the manifest reproduces the tables byte for byte.
  CHECK(results_csv(run_experiment(replay)) == results_csv(r));
  fs::remove_all(dir);
}

TEST_CASE("parallel_for touches every index exactly once") {
  for (int threads : {1, 3, 7}) {
    std::vector<int> marks(100, 0);
    parallel_for(marks.size(), threads, [&](size_t i) { marks[i] += 1; });
    CHECK(std::accumulate(marks.begin(), marks.end(), 0) == 100);
    CHECK(*std::min_element(marks.begin(), marks.end()) == 1);
  }
  parallel_for(0, 4, [](size_t) { FAIL("must not be called"); });
}
