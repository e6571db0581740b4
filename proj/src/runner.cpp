#include "pc/runner.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include "pc/parallel.hpp"

namespace pc {
namespace {

// Salts for deriving independent seed streams from the experiment seed.
enum : std::uint64_t {
  kSaltSubsetTrain = 101,
  kSaltSubsetTest = 102,
  kSaltPatchSample = 103,
  kSaltKmeans = 104,
  kSaltPlan = 105,
  kSaltMethodBase = 200,
};

int method_index(const std::string& name) {
  const auto it = std::find(kRunMethods.begin(), kRunMethods.end(), name);
  if (it == kRunMethods.end())
    throw std::invalid_argument("unknown method: " + name);
  return static_cast<int>(it - kRunMethods.begin());
}

Matrix sample_patches(const std::vector<Image>& images, int patchSide, std::size_t count,
                      std::uint64_t seed) {
  if (images.empty()) throw std::invalid_argument("sample_patches: no images");
  const Image& first = images.front();
  const int dim = patchSide * patchSide * first.channels;
  Matrix patches(static_cast<Eigen::Index>(count), dim);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pickImage(0, images.size() - 1);
  for (std::size_t i = 0; i < count; ++i) {
    const Image& img = images[pickImage(rng)];
    std::uniform_int_distribution<int> pickRow(0, img.height - patchSide);
    std::uniform_int_distribution<int> pickCol(0, img.width - patchSide);
    const int r0 = pickRow(rng);
    const int c0 = pickCol(rng);
    int d = 0;
    for (int ch = 0; ch < img.channels; ++ch)
      for (int py = 0; py < patchSide; ++py)
        for (int px = 0; px < patchSide; ++px)
          patches(static_cast<Eigen::Index>(i), d++) = img.at(ch, r0 + py, c0 + px);
  }
  return patches;
}

LabeledDataset encode_set(const CifarData& data, const DictionaryFile& dict, int patchSide,
                          int prepoolS, int threads) {
  LabeledDataset out;
  out.labels = data.labels;
  out.classCount = data.classCount;
  out.items.resize(data.images.size());
  parallel_for(data.images.size(), threads, [&](std::size_t i) {
    CodeGrid grid = encode_image(data.images[i], dict.dict, dict.whiten, patchSide);
    out.items[i] = prepoolS > 1 ? prepool(grid, prepoolS) : std::move(grid);
  });
  return out;
}

CifarData load_split(const std::vector<std::filesystem::path>& files, CifarFormat format,
                     std::size_t limit, std::size_t subset, std::uint64_t subsetSeed) {
  if (files.empty()) throw std::invalid_argument("no dataset files configured");
  CifarData data = load_cifar_files(files, format, limit);
  subsample_cifar(data, subset, subsetSeed);
  return data;
}

double accuracy_percent(const ClassifierParams& classifier, const Matrix& features,
                        const std::vector<int>& labels) {
  return 100.0 * classification_accuracy(classifier, features, labels);
}

struct MethodOutput {
  ResultRow row;
  std::optional<ModelParams> model;  // single-model methods only
  std::vector<TraceRow> trace;
};

std::vector<int> kfold_assignment(std::size_t n, int folds, std::uint64_t seed) {
  std::vector<int> fold(n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t i = 0; i < n; ++i) fold[order[i]] = static_cast<int>(i % folds);
  return fold;
}

// Mean validation accuracy of the classifier-only path across folds.
double cv_classifier_accuracy(const Matrix& features, const std::vector<int>& labels,
                              int classCount, ClassifierKind kind, const Hyperparams& hyper,
                              int folds, std::uint64_t seed) {
  const std::vector<int> fold = kfold_assignment(labels.size(), folds, seed);
  double total = 0.0;
  for (int f = 0; f < folds; ++f) {
    std::vector<Eigen::Index> trainIdx, valIdx;
    for (std::size_t i = 0; i < labels.size(); ++i)
      (fold[i] == f ? valIdx : trainIdx).push_back(static_cast<Eigen::Index>(i));
    Matrix trainF(trainIdx.size(), features.cols());
    Matrix valF(valIdx.size(), features.cols());
    std::vector<int> trainY(trainIdx.size()), valY(valIdx.size());
    for (std::size_t i = 0; i < trainIdx.size(); ++i) {
      trainF.row(static_cast<Eigen::Index>(i)) = features.row(trainIdx[i]);
      trainY[i] = labels[trainIdx[i]];
    }
    for (std::size_t i = 0; i < valIdx.size(); ++i) {
      valF.row(static_cast<Eigen::Index>(i)) = features.row(valIdx[i]);
      valY[i] = labels[valIdx[i]];
    }
    ClassifierParams c = retrain_classifier(trainF, trainY, classCount, kind, hyper);
    total += classification_accuracy(c, valF, valY);
  }
  return total / folds;
}

double select_alpha1_cv(const Matrix& features, const std::vector<int>& labels, int classCount,
                        ClassifierKind kind, Hyperparams hyper, const std::vector<double>& grid,
                        int folds, std::uint64_t seed) {
  double bestAlpha = hyper.alpha1;
  double bestAcc = -1.0;
  for (double alpha : grid) {
    hyper.alpha1 = alpha;
    const double acc =
        cv_classifier_accuracy(features, labels, classCount, kind, hyper, folds, seed);
    if (acc > bestAcc) {
      bestAcc = acc;
      bestAlpha = alpha;
    }
  }
  return bestAlpha;
}

LabeledDataset take_items(const LabeledDataset& data, const std::vector<std::size_t>& idx) {
  LabeledDataset out;
  out.classCount = data.classCount;
  out.items.reserve(idx.size());
  out.labels.reserve(idx.size());
  for (std::size_t i : idx) {
    out.items.push_back(data.items[i]);
    out.labels.push_back(data.labels[i]);
  }
  return out;
}

// K-fold selection of the pooling regularizers for joint training: each
// candidate (alpha2, alpha3) is trained on the fold complements and scored by
// held-out accuracy of its jointly-trained classifier.
std::pair<double, double> select_pooling_alphas_cv(const LabeledDataset& data,
                                                   const InitScheme& scheme, Optimizer optimizer,
                                                   Hyperparams hyper,
                                                   const std::vector<double>& alpha2Grid,
                                                   const std::vector<double>& alpha3Grid,
                                                   int folds, std::uint64_t seed, int L) {
  const std::vector<double> a2s = alpha2Grid.empty() ? std::vector<double>{hyper.alpha2}
                                                     : alpha2Grid;
  const std::vector<double> a3s = alpha3Grid.empty() ? std::vector<double>{hyper.alpha3}
                                                     : alpha3Grid;
  const std::vector<int> fold = kfold_assignment(data.size(), folds, seed);
  const auto& g0 = data.items.front();

  double bestAcc = -1.0;
  std::pair<double, double> best{hyper.alpha2, hyper.alpha3};
  for (double a2 : a2s) {
    for (double a3 : a3s) {
      hyper.alpha2 = a2;
      hyper.alpha3 = a3;
      double total = 0.0;
      for (int f = 0; f < folds; ++f) {
        std::vector<std::size_t> trainIdx, valIdx;
        for (std::size_t i = 0; i < data.size(); ++i)
          (fold[i] == f ? valIdx : trainIdx).push_back(i);
        LabeledDataset trainFold = take_items(data, trainIdx);
        LabeledDataset valFold = take_items(data, valIdx);
        ModelParams init;
        init.pooling = init_pooling(scheme, L, g0.gridH, g0.gridW, g0.codeDim(), seed);
        init.classifier = make_classifier(data.classCount, init.pooling.featureLength());
        TrainResult result = train_joint(trainFold, std::move(init), hyper, optimizer);
        Matrix valF = assemble_features(valFold, {as_partial(result.model.pooling)},
                                        hyper.threads);
        total += classification_accuracy(result.model.classifier, valF, valFold.labels);
      }
      if (total / folds > bestAcc) {
        bestAcc = total / folds;
        best = {a2, a3};
      }
    }
  }
  return best;
}

}  // namespace

void subsample_cifar(CifarData& data, std::size_t count, std::uint64_t seed) {
  if (count == 0 || count >= data.images.size()) return;
  std::vector<std::size_t> order(data.images.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(count);

  CifarData picked;
  picked.classCount = data.classCount;
  picked.images.reserve(count);
  picked.labels.reserve(count);
  for (std::size_t idx : order) {
    picked.images.push_back(std::move(data.images[idx]));
    picked.labels.push_back(data.labels[idx]);
  }
  data = std::move(picked);
}

std::filesystem::path run_train_dictionary(const ExperimentConfig& cfg,
                                           const std::filesystem::path& output) {
  CifarData train = load_split(cfg.trainFiles, cfg.format, cfg.trainLimit, cfg.trainSubset,
                               mix_seed(cfg.seed, kSaltSubsetTrain));
  if (cfg.patchSample < static_cast<std::size_t>(cfg.K))
    throw std::invalid_argument("train-dictionary: patch_sample smaller than k");

  Matrix patches = sample_patches(train.images, cfg.patchSide, cfg.patchSample,
                                  mix_seed(cfg.seed, kSaltPatchSample));
  patches *= kPatchScale;
  normalize_patches(patches, kNormVarFloor);
  WhitenTransform wt = fit_zca(patches, cfg.zcaEpsilon);
  whiten_apply_rows(wt, patches);
  Dictionary dict =
      kmeans_fit(patches, cfg.K, cfg.kmeansIters, mix_seed(cfg.seed, kSaltKmeans));
  save_dictionary(output, dict, wt);
  return output;
}

LabeledDataset encode_split(const ExperimentConfig& cfg, bool testSplit) {
  if (cfg.dictionaryPath.empty())
    throw std::invalid_argument("encode: 'dictionary' is required (or provide code caches)");
  if (!std::filesystem::exists(cfg.dictionaryPath))
    throw std::invalid_argument("encode: dictionary file not found: " +
                                cfg.dictionaryPath.string());
  const DictionaryFile dict = load_dictionary(cfg.dictionaryPath);
  CifarData data = testSplit
                       ? load_split(cfg.testFiles, cfg.format, cfg.testLimit, cfg.testSubset,
                                    mix_seed(cfg.seed, kSaltSubsetTest))
                       : load_split(cfg.trainFiles, cfg.format, cfg.trainLimit, cfg.trainSubset,
                                    mix_seed(cfg.seed, kSaltSubsetTrain));
  return encode_set(data, dict, cfg.patchSide, cfg.hyper.prepoolS, cfg.hyper.threads);
}

EncodedData encode_datasets(const ExperimentConfig& cfg) {
  EncodedData enc;
  if (!cfg.codesTrainPath.empty() && !cfg.codesTestPath.empty()) {
    enc.train = load_codes(cfg.codesTrainPath);
    enc.test = load_codes(cfg.codesTestPath);
    return enc;
  }
  enc.train = encode_split(cfg, false);
  enc.test = encode_split(cfg, true);
  return enc;
}

namespace {

MethodOutput run_fixed_pooling(const ExperimentConfig& cfg, const EncodedData& enc,
                               const InitScheme& scheme, const std::string& name,
                               std::uint64_t seed) {
  const auto& g0 = enc.train.items.front();
  const int L = scheme.kind == InitKind::SpmQuadrants ? 4 : cfg.units;
  PoolingWeights pooling = init_pooling(scheme, L, g0.gridH, g0.gridW, g0.codeDim(), seed);
  const std::vector<PartialModel> partials = {as_partial(pooling)};

  Matrix trainF = assemble_features(enc.train, partials, cfg.hyper.threads);
  Matrix testF = assemble_features(enc.test, partials, cfg.hyper.threads);

  Hyperparams hyper = cfg.hyper;
  if (cfg.cvFolds > 0 && !cfg.alpha1Grid.empty()) {
    hyper.alpha1 = select_alpha1_cv(trainF, enc.train.labels, enc.train.classCount,
                                    cfg.classifier, hyper, cfg.alpha1Grid, cfg.cvFolds, seed);
  }
  ClassifierParams classifier =
      retrain_classifier(trainF, enc.train.labels, enc.train.classCount, cfg.classifier, hyper);

  MethodOutput out;
  out.row = {name, g0.codeDim(), pooling.featureLength(), 0.0, false, ""};
  out.row.accuracyPercent = accuracy_percent(classifier, testF, enc.test.labels);
  out.model = ModelParams{std::move(pooling), std::move(classifier)};
  return out;
}

MethodOutput run_learned_full(const ExperimentConfig& cfg, const EncodedData& enc,
                              Hyperparams hyper, const std::string& name, std::uint64_t seed,
                              bool cvSelect) {
  const auto& g0 = enc.train.items.front();
  const int L = cfg.init.kind == InitKind::SpmQuadrants ? 4 : cfg.units;
  if (cvSelect && cfg.cvFolds > 0 && (!cfg.alpha2Grid.empty() || !cfg.alpha3Grid.empty())) {
    std::tie(hyper.alpha2, hyper.alpha3) =
        select_pooling_alphas_cv(enc.train, cfg.init, cfg.optimizer, hyper, cfg.alpha2Grid,
                                 cfg.alpha3Grid, cfg.cvFolds, seed, L);
  }
  ModelParams init;
  init.pooling = init_pooling(cfg.init, L, g0.gridH, g0.gridW, g0.codeDim(), seed);
  init.classifier = make_classifier(enc.train.classCount, init.pooling.featureLength());

  TrainResult result = train_joint(enc.train, std::move(init), hyper, cfg.optimizer);

  const std::vector<PartialModel> partials = {as_partial(result.model.pooling)};
  Matrix testF = assemble_features(enc.test, partials, cfg.hyper.threads);

  MethodOutput out;
  out.row = {name, g0.codeDim(), result.model.pooling.featureLength(), 0.0, false, ""};
  out.row.accuracyPercent =
      accuracy_percent(result.model.classifier, testF, enc.test.labels);
  out.model = std::move(result.model);
  out.trace = std::move(result.trace);
  return out;
}

MethodOutput run_learned_batches(const ExperimentConfig& cfg, const EncodedData& enc,
                                 bool redundant, const std::string& name, std::uint64_t seed) {
  const auto& g0 = enc.train.items.front();
  const int K = g0.codeDim();
  const int D = cfg.hyper.batchWidthD > 0 ? cfg.hyper.batchWidthD : K;
  BatchPlan plan = make_plan(K, D, redundant, mix_seed(seed, kSaltPlan));

  const int L = cfg.init.kind == InitKind::SpmQuadrants ? 4 : cfg.units;
  std::vector<PartialModel> partials = train_batches(enc.train, plan, cfg.hyper, cfg.init,
                                                     cfg.optimizer, seed, cfg.workers, L);
  for (const PartialModel& p : partials)
    if (p.failed()) throw NumericError(name + ": batch failed: " + p.error);

  Matrix trainF = assemble_features(enc.train, partials, cfg.hyper.threads);
  Matrix testF = assemble_features(enc.test, partials, cfg.hyper.threads);
  ClassifierParams classifier = retrain_classifier(trainF, enc.train.labels,
                                                   enc.train.classCount, cfg.classifier,
                                                   cfg.hyper);

  // Persist per-batch pooling alongside the manifest; there is no single
  // combined model file for batch methods.
  const std::filesystem::path batchDir = cfg.outDir / ("batches_" + name);
  std::filesystem::create_directories(batchDir);
  save_plan(batchDir / "plan.txt", plan);
  for (int b = 0; b < plan.batchCount(); ++b) {
    ModelParams m;
    m.pooling = partials[b].pooling;
    m.classifier = make_classifier(enc.train.classCount, partials[b].pooling.featureLength());
    save_model(batchDir / ("batch" + std::to_string(b) + ".pcm"), m);
  }

  MethodOutput out;
  out.row = {name, K, static_cast<long>(trainF.cols()), 0.0, false, ""};
  out.row.accuracyPercent = accuracy_percent(classifier, testF, enc.test.labels);
  return out;
}

}  // namespace

std::string ResultsTable::to_csv() const {
  std::ostringstream out;
  out << "method,dict_size,features,accuracy\n";
  for (const ResultRow& row : rows) {
    out << row.method << ',' << row.dictionarySize << ',' << row.featureCount << ',';
    if (row.failed)
      out << "failed";
    else
      out << std::fixed << std::setprecision(2) << row.accuracyPercent;
    out << '\n';
  }
  return out.str();
}

std::string ResultsTable::to_text() const {
  std::ostringstream out;
  out << std::left << std::setw(20) << "method" << std::setw(12) << "dict_size" << std::setw(12)
      << "features" << std::setw(10) << "accuracy" << '\n';
  for (const ResultRow& row : rows) {
    out << std::left << std::setw(20) << row.method << std::setw(12) << row.dictionarySize
        << std::setw(12) << row.featureCount;
    if (row.failed)
      out << std::setw(10) << "failed" << ' ' << row.note;
    else
      out << std::fixed << std::setprecision(2) << row.accuracyPercent << '%';
    out << '\n';
  }
  return out.str();
}

ResultsTable run_experiment(const ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.outDir);
  const EncodedData enc = encode_datasets(cfg);

  std::vector<std::string> methods = cfg.methods;
  if (methods.empty() && !cfg.ablation)
    methods = {"spm_fixed", "random_pooling", "learned_full"};

  ResultsTable table;
  auto runMethod = [&](const std::string& name) {
    const std::uint64_t seed = mix_seed(cfg.seed, kSaltMethodBase + method_index(name));
    try {
      MethodOutput out;
      if (name == "spm_fixed") {
        InitScheme scheme;
        scheme.kind = InitKind::SpmQuadrants;
        out = run_fixed_pooling(cfg, enc, scheme, name, seed);
      } else if (name == "random_pooling") {
        InitScheme scheme;
        scheme.kind = InitKind::RandomGaussian;
        out = run_fixed_pooling(cfg, enc, scheme, name, seed);
      } else if (name == "learned_full") {
        out = run_learned_full(cfg, enc, cfg.hyper, name, seed, /*cvSelect=*/true);
      } else if (name == "learned_batches") {
        out = run_learned_batches(cfg, enc, false, name, seed);
      } else if (name == "learned_redundant") {
        out = run_learned_batches(cfg, enc, true, name, seed);
      } else {
        throw std::invalid_argument("unknown method: " + name);
      }
      if (out.model) save_model(cfg.outDir / ("model_" + name + ".pcm"), *out.model);
      if (!out.trace.empty())
        write_trace_csv(cfg.outDir / ("trace_" + name + ".csv"), out.trace);
      table.rows.push_back(std::move(out.row));
    } catch (const std::exception& e) {
      ResultRow row;
      row.method = name;
      row.dictionarySize = enc.train.items.empty() ? 0 : enc.train.items.front().codeDim();
      row.failed = true;
      row.note = e.what();
      table.rows.push_back(std::move(row));
    }
  };

  for (const std::string& name : methods) runMethod(name);

  if (cfg.ablation) {
    const double a2 = cfg.hyper.alpha2 > 0.0 ? cfg.hyper.alpha2 : 1e-2;
    const double a3 = cfg.hyper.alpha3 > 0.0 ? cfg.hyper.alpha3 : 1e-2;
    const std::vector<std::pair<std::string, std::pair<double, double>>> settings = {
        {"free", {0.0, 0.0}},
        {"l2", {a2, 0.0}},
        {"smooth", {0.0, a3}},
        {"l2+smooth", {a2, a3}},
    };
    const std::uint64_t seed = mix_seed(cfg.seed, kSaltMethodBase + 51);
    for (const auto& [label, alphas] : settings) {
      try {
        Hyperparams hyper = cfg.hyper;
        hyper.alpha2 = alphas.first;
        hyper.alpha3 = alphas.second;
        MethodOutput out = run_learned_full(cfg, enc, hyper, label, seed, /*cvSelect=*/false);
        if (out.model) save_model(cfg.outDir / ("model_" + label + ".pcm"), *out.model);
        write_trace_csv(cfg.outDir / ("trace_" + label + ".csv"), out.trace);
        table.rows.push_back(std::move(out.row));
      } catch (const std::exception& e) {
        ResultRow row;
        row.method = label;
        row.failed = true;
        row.note = e.what();
        table.rows.push_back(std::move(row));
      }
    }
  }

  std::ofstream csv(cfg.outDir / "results.csv");
  csv << table.to_csv();
  std::ofstream txt(cfg.outDir / "results.txt");
  txt << table.to_text();
  return table;
}

TransferReport run_transfer(const std::filesystem::path& sourceModel,
                            const std::optional<std::filesystem::path>& sourceManifest,
                            const std::optional<std::filesystem::path>& sourceModelsDir,
                            const ExperimentConfig& targetCfg, ClassifierKind kind) {
  std::vector<PartialModel> partials;
  std::string sourceId;
  if (sourceManifest && sourceModelsDir) {
    const auto assignments = load_plan(*sourceManifest);
    for (std::size_t b = 0; b < assignments.size(); ++b) {
      PartialModel p;
      p.coordinateSet = assignments[b];
      p.pooling = load_model(*sourceModelsDir / ("batch" + std::to_string(b) + ".pcm")).pooling;
      partials.push_back(std::move(p));
    }
    sourceId = sourceManifest->stem().string();
  } else {
    if (!std::filesystem::exists(sourceModel))
      throw std::invalid_argument("transfer: source model not found: " + sourceModel.string());
    partials.push_back(as_partial(load_model(sourceModel).pooling));
    sourceId = sourceModel.stem().string();
  }

  const EncodedData enc = encode_datasets(targetCfg);
  return transfer_pooling(partials, enc.train, enc.test, kind, targetCfg.hyper, sourceId,
                          targetCfg.id);
}

}  // namespace pc
