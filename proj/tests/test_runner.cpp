#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pc/runner.hpp"
#include "support/synthetic_cifar.hpp"

using namespace pc;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "pc_runner_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

ExperimentConfig tiny_config(const std::string& tag) {
  const fs::path dir = work_dir() / tag;
  fs::create_directories(dir);
  const fs::path trainBin = work_dir() / "train.bin";
  const fs::path testBin = work_dir() / "test.bin";
  if (!fs::exists(trainBin)) {
    pc_test::write_synthetic_cifar10(trainBin, 400, 11);
    pc_test::write_synthetic_cifar10(testBin, 150, 12);
  }
  ExperimentConfig cfg;
  cfg.trainFiles = {trainBin};
  cfg.testFiles = {testBin};
  cfg.K = 6;
  cfg.patchSample = 4000;
  cfg.kmeansIters = 8;
  cfg.hyper.prepoolS = 3;
  cfg.hyper.alpha1 = 1e-4;
  cfg.hyper.alpha3 = 0.1;
  cfg.hyper.maxIters = 25;
  cfg.seed = 3;
  cfg.outDir = dir;
  cfg.dictionaryPath = dir / "dictionary.pcd";
  return cfg;
}

std::string file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("dictionary training is byte-deterministic") {
  ExperimentConfig cfg = tiny_config("dict");
  run_train_dictionary(cfg, cfg.outDir / "a.pcd");
  run_train_dictionary(cfg, cfg.outDir / "b.pcd");
  CHECK(file_bytes(cfg.outDir / "a.pcd") == file_bytes(cfg.outDir / "b.pcd"));

  DictionaryFile file = load_dictionary(cfg.outDir / "a.pcd");
  CHECK(file.dict.size() == 6);
  CHECK(file.dict.dim() == 108);
  CHECK(file.whiten.epsilon == doctest::Approx(0.1));

  SUBCASE("K above the patch sample is rejected") {
    ExperimentConfig bad = cfg;
    bad.patchSample = 4;
    CHECK_THROWS_AS(run_train_dictionary(bad, cfg.outDir / "c.pcd"), std::invalid_argument);
  }
}

TEST_CASE("run_experiment") {
  ExperimentConfig cfg = tiny_config("run");
  run_train_dictionary(cfg, cfg.dictionaryPath);

  SUBCASE("methods produce rows, models, and reproducible artifacts") {
    cfg.methods = {"spm_fixed", "learned_batches"};
    cfg.hyper.batchWidthD = 3;
    cfg.workers = 2;
    ResultsTable table = run_experiment(cfg);
    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[0].method == "spm_fixed");
    CHECK_FALSE(table.rows[0].failed);
    CHECK(table.rows[0].featureCount == 4 * 6);
    CHECK(table.rows[1].featureCount == 2 * 4 * 3);  // batches * L * D
    CHECK(fs::exists(cfg.outDir / "model_spm_fixed.pcm"));
    CHECK(fs::exists(cfg.outDir / "results.csv"));
    CHECK(fs::exists(cfg.outDir / "batches_learned_batches" / "plan.txt"));
    CHECK(fs::exists(cfg.outDir / "batches_learned_batches" / "batch1.pcm"));

    const std::string model1 = file_bytes(cfg.outDir / "model_spm_fixed.pcm");
    ExperimentConfig rerun = cfg;
    rerun.outDir = work_dir() / "run_again";
    fs::create_directories(rerun.outDir);
    run_experiment(rerun);
    CHECK(file_bytes(rerun.outDir / "model_spm_fixed.pcm") == model1);
  }
  SUBCASE("ablation emits the four labeled rows") {
    cfg.methods = {};
    cfg.ablation = true;
    cfg.hyper.maxIters = 10;
    ResultsTable table = run_experiment(cfg);
    REQUIRE(table.rows.size() == 4);
    CHECK(table.rows[0].method == "free");
    CHECK(table.rows[1].method == "l2");
    CHECK(table.rows[2].method == "smooth");
    CHECK(table.rows[3].method == "l2+smooth");
    CHECK(fs::exists(cfg.outDir / "trace_smooth.csv"));

    std::istringstream csv(table.to_csv());
    std::string line;
    std::getline(csv, line);
    CHECK(line == "method,dict_size,features,accuracy");
  }
  SUBCASE("a failing method is recorded, not fatal") {
    cfg.methods = {"spm_fixed", "learned_batches"};
    cfg.hyper.batchWidthD = 5;  // 6 % 5 != 0
    ResultsTable table = run_experiment(cfg);
    REQUIRE(table.rows.size() == 2);
    CHECK_FALSE(table.rows[0].failed);
    CHECK(table.rows[1].failed);
    CHECK(table.to_csv().find("failed") != std::string::npos);
  }
  SUBCASE("missing dictionary is a config error") {
    cfg.dictionaryPath = cfg.outDir / "nope.pcd";
    CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
  }
}

TEST_CASE("cross-validated regularizer selection runs end to end") {
  ExperimentConfig cfg = tiny_config("cv");
  run_train_dictionary(cfg, cfg.dictionaryPath);
  cfg.methods = {"spm_fixed", "learned_full"};
  cfg.cvFolds = 2;
  cfg.alpha1Grid = {1e-4, 1e-2};
  cfg.alpha3Grid = {0.0, 0.1};
  cfg.hyper.maxIters = 10;
  ResultsTable table = run_experiment(cfg);
  REQUIRE(table.rows.size() == 2);
  CHECK_FALSE(table.rows[0].failed);
  CHECK_FALSE(table.rows[1].failed);
}

TEST_CASE("transfer against a saved model file") {
  ExperimentConfig cfg = tiny_config("transfer");
  run_train_dictionary(cfg, cfg.dictionaryPath);
  cfg.methods = {"spm_fixed"};
  run_experiment(cfg);

  TransferReport report = run_transfer(cfg.outDir / "model_spm_fixed.pcm", std::nullopt,
                                       std::nullopt, cfg, ClassifierKind::Softmax);
  CHECK(report.sourceId == "model_spm_fixed");
  CHECK(report.classifierKind == "softmax");
  CHECK(report.accuracyPercent > 0.0);
}
