#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "pc/io.hpp"
#include "pc/runner.hpp"

namespace {

namespace fs = std::filesystem;

pc::ExperimentConfig load_config(const std::string& configPath,
                                 const std::vector<std::string>& overrides) {
  pc::KeyValueConfig kv;
  if (!configPath.empty()) kv = pc::KeyValueConfig::from_file(configPath);
  kv.apply_overrides(overrides);
  return pc::ExperimentConfig::from_kv(kv);
}

int cmd_train_dictionary(const std::string& configPath, const std::vector<std::string>& overrides,
                         std::string output) {
  pc::ExperimentConfig cfg = load_config(configPath, overrides);
  if (output.empty()) {
    output = cfg.dictionaryPath.empty() ? (cfg.outDir / "dictionary.pcd").string()
                                        : cfg.dictionaryPath.string();
  }
  fs::path written = pc::run_train_dictionary(cfg, output);
  std::cout << "wrote " << written.string() << "\n";
  return 0;
}

int cmd_encode(const std::string& configPath, const std::vector<std::string>& overrides,
               const std::string& split, const std::string& output) {
  pc::ExperimentConfig cfg = load_config(configPath, overrides);
  if (split != "train" && split != "test")
    throw std::invalid_argument("encode: --split must be 'train' or 'test'");
  pc::LabeledDataset codes = pc::encode_split(cfg, split == "test");
  pc::save_codes(output, codes);
  std::cout << "wrote " << output << " (" << codes.size() << " items, grid "
            << codes.items.front().gridH << "x" << codes.items.front().gridW << "x"
            << codes.items.front().codeDim() << ")\n";
  return 0;
}

int cmd_run(const std::string& configPath, const std::vector<std::string>& overrides) {
  pc::ExperimentConfig cfg = load_config(configPath, overrides);
  pc::ResultsTable table = pc::run_experiment(cfg);
  std::cout << table.to_text();
  const bool allFailed = !table.rows.empty() &&
                         std::all_of(table.rows.begin(), table.rows.end(),
                                     [](const pc::ResultRow& r) { return r.failed; });
  if (allFailed) throw pc::NumericError("run: every method failed");
  return 0;
}

int cmd_visualize(const std::string& modelPath, const std::string& outDir, int maxMaps) {
  pc::PoolingWeights pooling;
  try {
    pooling = pc::load_model(modelPath).pooling;
  } catch (const pc::FormatError&) {
    pooling = pc::load_pooling(modelPath);  // accept bare pooling files as well
  }

  fs::create_directories(outDir);
  std::ofstream index(fs::path(outDir) / "index.txt");
  int written = 0;
  for (int l = 0; l < pooling.unitCount() && written < maxMaps; ++l) {
    for (int k = 0; k < pooling.codeDim() && written < maxMaps; ++k) {
      const std::string name = "unit" + std::to_string(l) + "_coord" + std::to_string(k) + ".pgm";
      const pc::Vector map = pooling.units[l].col(k);
      pc::write_pgm(fs::path(outDir) / name, pooling.gridH, pooling.gridW, map);
      index << name << " unit=" << l << " coord=" << k << " min=" << map.minCoeff()
            << " max=" << map.maxCoeff() << "\n";
      ++written;
    }
  }
  std::cout << "wrote " << written << " maps to " << outDir << "\n";
  return 0;
}

int cmd_transfer(const std::string& sourceModel, const std::string& manifest,
                 const std::string& modelsDir, const std::string& configPath,
                 const std::vector<std::string>& overrides, const std::string& classifier,
                 std::string output) {
  pc::ExperimentConfig cfg = load_config(configPath, overrides);
  pc::ClassifierKind kind = cfg.classifier;
  if (classifier == "softmax")
    kind = pc::ClassifierKind::Softmax;
  else if (classifier == "linear_svm")
    kind = pc::ClassifierKind::LinearSvm;
  else if (!classifier.empty())
    throw std::invalid_argument("transfer: unknown classifier: " + classifier);

  std::optional<fs::path> manifestPath, modelsDirPath;
  if (!manifest.empty()) manifestPath = manifest;
  if (!modelsDir.empty()) modelsDirPath = modelsDir;
  if (sourceModel.empty() && !manifestPath)
    throw std::invalid_argument("transfer: provide --source or --manifest with --models-dir");

  pc::TransferReport report =
      pc::run_transfer(sourceModel, manifestPath, modelsDirPath, cfg, kind);

  if (output.empty()) output = (cfg.outDir / "transfer.csv").string();
  fs::create_directories(fs::path(output).parent_path().empty() ? fs::path(".")
                                                                : fs::path(output).parent_path());
  std::ofstream out(output);
  out << "source,target,classifier,accuracy\n";
  out << report.sourceId << ',' << report.targetId << ',' << report.classifierKind << ','
      << report.accuracyPercent << "\n";
  std::cout << "source=" << report.sourceId << " target=" << report.targetId
            << " classifier=" << report.classifierKind << " accuracy=" << report.accuracyPercent
            << "%\n";
  return 0;
}

int cmd_gradcheck(int instances, double h, std::uint64_t seed, double threshold) {
  std::mt19937_64 rng(seed);
  const std::vector<std::pair<double, double>> settings = {
      {0.0, 0.0}, {1e-2, 0.0}, {0.0, 1e-2}, {1e-2, 1e-2}};

  double worst = 0.0;
  for (int inst = 0; inst < instances; ++inst) {
    std::uniform_int_distribution<int> gridDist(2, 4), kDist(1, 4), lDist(1, 3), cDist(2, 3),
        nDist(2, 8);
    const int gridH = gridDist(rng), gridW = gridDist(rng);
    const int K = kDist(rng), L = lDist(rng), C = cDist(rng), N = nDist(rng);

    std::uniform_real_distribution<double> codeDist(0.0, 1.0), wDist(0.2, 0.8),
        thetaDist(-0.5, 0.5);
    pc::LabeledDataset data;
    data.classCount = C;
    std::uniform_int_distribution<int> labelDist(0, C - 1);
    for (int i = 0; i < N; ++i) {
      pc::CodeGrid g;
      g.gridH = gridH;
      g.gridW = gridW;
      g.codes.resize(gridH * gridW, K);
      for (Eigen::Index j = 0; j < g.codes.size(); ++j) g.codes.data()[j] = codeDist(rng);
      data.items.push_back(std::move(g));
      data.labels.push_back(labelDist(rng));
    }

    pc::ModelParams model;
    model.pooling.gridH = gridH;
    model.pooling.gridW = gridW;
    model.pooling.units.assign(L, pc::Matrix(gridH * gridW, K));
    for (auto& unit : model.pooling.units)
      for (Eigen::Index j = 0; j < unit.size(); ++j) unit.data()[j] = wDist(rng);
    model.classifier = pc::make_classifier(C, L * K);
    for (Eigen::Index j = 0; j < model.classifier.theta.size(); ++j)
      model.classifier.theta.data()[j] = thetaDist(rng);
    for (Eigen::Index j = 0; j < model.classifier.bias.size(); ++j)
      model.classifier.bias[j] = thetaDist(rng);

    const auto& alphas = settings[inst % settings.size()];
    pc::Hyperparams hyper;
    hyper.alpha1 = 1e-3;
    hyper.alpha2 = alphas.first;
    hyper.alpha3 = alphas.second;

    pc::FiniteDiffReport report =
        pc::finite_diff_check(model, data, hyper, h, 200, pc::mix_seed(seed, inst));
    worst = std::max(worst, report.maxRelError);
    std::cout << "instance " << inst << ": grid " << gridH << "x" << gridW << " K=" << K
              << " L=" << L << " C=" << C << " n=" << N << " alpha2=" << alphas.first
              << " alpha3=" << alphas.second << " checked=" << report.checked
              << " skipped=" << report.skippedBoundary << " maxRelErr=" << report.maxRelError
              << "\n";
  }
  std::cout << "max relative error over " << instances << " instances: " << worst << "\n";
  if (!(worst < threshold))
    throw pc::NumericError("gradcheck: max relative error " + std::to_string(worst) +
                           " exceeds threshold");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learnable spatial pooling for patch-code image classification"};
  app.require_subcommand(1);

  std::string configPath, output, split = "train", modelPath, outDir = "maps";
  std::string sourceModel, manifest, modelsDir, classifier;
  int maxMaps = 64, instances = 20;
  double h = 1e-5, threshold = 1e-5;
  std::uint64_t gcSeed = 1;

  auto* trainDict = app.add_subcommand("train-dictionary", "Fit whitening + K-means dictionary");
  trainDict->add_option("--config", configPath, "key = value config file");
  trainDict->add_option("--output", output, "output PCDICT01 path");
  trainDict->allow_extras();

  auto* encode = app.add_subcommand("encode", "Encode a split to a PCCODE01 cache");
  encode->add_option("--config", configPath);
  encode->add_option("--split", split, "train or test")->required();
  encode->add_option("--output", output)->required();
  encode->allow_extras();

  auto* run = app.add_subcommand("run", "Run experiment methods / ablation");
  run->add_option("--config", configPath);
  run->allow_extras();

  auto* visualize = app.add_subcommand("visualize", "Export pooling weight maps as PGM");
  visualize->add_option("--model", modelPath)->required();
  visualize->add_option("--out", outDir);
  visualize->add_option("--max-maps", maxMaps);

  auto* transfer = app.add_subcommand("transfer", "Reuse source pooling on a target dataset");
  transfer->add_option("--source", sourceModel, "source PCMODL01 file");
  transfer->add_option("--manifest", manifest, "batch plan manifest");
  transfer->add_option("--models-dir", modelsDir, "directory with batch<i>.pcm files");
  transfer->add_option("--config", configPath, "target dataset config");
  transfer->add_option("--classifier", classifier, "softmax or linear_svm");
  transfer->add_option("--output", output, "report CSV path");
  transfer->allow_extras();

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient validation");
  gradcheck->add_option("--instances", instances);
  gradcheck->add_option("--step", h, "central-difference step size");
  gradcheck->add_option("--seed", gcSeed);
  gradcheck->add_option("--threshold", threshold);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // help/version exit cleanly; usage errors are 2
  }

  try {
    if (trainDict->parsed())
      return cmd_train_dictionary(configPath, trainDict->remaining(), output);
    if (encode->parsed()) return cmd_encode(configPath, encode->remaining(), split, output);
    if (run->parsed()) return cmd_run(configPath, run->remaining());
    if (visualize->parsed()) return cmd_visualize(modelPath, outDir, maxMaps);
    if (transfer->parsed())
      return cmd_transfer(sourceModel, manifest, modelsDir, configPath, transfer->remaining(),
                          classifier, output);
    if (gradcheck->parsed()) return cmd_gradcheck(instances, h, gcSeed, threshold);
  } catch (const pc::FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const pc::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
