#include "pc/batching.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

#include "pc/parallel.hpp"
#include "train_classifier.hpp"

namespace pc {

BatchPlan make_plan(int K, int D, bool redundant, std::uint64_t seed) {
  if (K < 1 || D < 1) throw std::invalid_argument("make_plan: K and D must be positive");
  if (D > K) throw std::invalid_argument("make_plan: D must not exceed K");
  if (K % D != 0) {
    throw std::invalid_argument("make_plan: K (" + std::to_string(K) +
                                ") must be divisible by D (" + std::to_string(D) + ")");
  }
  BatchPlan plan;
  plan.K = K;
  plan.D = D;
  plan.redundant = redundant;
  plan.permutationSeed = seed;

  for (int b = 0; b < K / D; ++b) {
    std::vector<int> coords(D);
    std::iota(coords.begin(), coords.end(), b * D);
    plan.assignments.push_back(std::move(coords));
  }
  if (redundant) {
    std::vector<int> perm(K);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int b = 0; b < K / D; ++b) {
      plan.assignments.emplace_back(perm.begin() + static_cast<std::ptrdiff_t>(b) * D,
                                    perm.begin() + static_cast<std::ptrdiff_t>(b + 1) * D);
    }
  }
  return plan;
}

LabeledDataset slice_dataset(const LabeledDataset& data, const std::vector<int>& coords) {
  if (coords.empty()) throw std::invalid_argument("slice_dataset: empty coordinate list");
  if (data.items.empty()) throw std::invalid_argument("slice_dataset: empty dataset");
  const int K = data.items.front().codeDim();
  for (int c : coords) {
    if (c < 0 || c >= K)
      throw std::invalid_argument("slice_dataset: coordinate " + std::to_string(c) +
                                  " out of range for K = " + std::to_string(K));
  }
  LabeledDataset out;
  out.labels = data.labels;
  out.classCount = data.classCount;
  out.items.reserve(data.items.size());
  for (const CodeGrid& grid : data.items) {
    CodeGrid sliced;
    sliced.gridH = grid.gridH;
    sliced.gridW = grid.gridW;
    sliced.codes.resize(grid.codes.rows(), static_cast<Eigen::Index>(coords.size()));
    for (std::size_t k = 0; k < coords.size(); ++k)
      sliced.codes.col(static_cast<Eigen::Index>(k)) = grid.codes.col(coords[k]);
    out.items.push_back(std::move(sliced));
  }
  return out;
}

PartialModel as_partial(const PoolingWeights& pooling) {
  PartialModel p;
  p.coordinateSet.resize(pooling.codeDim());
  std::iota(p.coordinateSet.begin(), p.coordinateSet.end(), 0);
  p.pooling = pooling;
  return p;
}

std::vector<PartialModel> train_batches(const LabeledDataset& data, const BatchPlan& plan,
                                        const Hyperparams& hyper, const InitScheme& initScheme,
                                        Optimizer optimizer, std::uint64_t seed, int workerCount,
                                        int unitCount) {
  if (workerCount < 1) throw std::invalid_argument("train_batches: workerCount must be >= 1");
  if (data.items.empty()) throw std::invalid_argument("train_batches: empty dataset");

  const int L = unitCount;
  const int batchCount = plan.batchCount();
  std::vector<PartialModel> partials(batchCount);

  // Inner gradient reduction is chunk-ordered, so per-batch results do not
  // depend on either the worker count or the inner thread count.
  Hyperparams batchHyper = hyper;
  if (workerCount > 1) batchHyper.threads = 1;

  auto trainOne = [&](int b) {
    PartialModel& out = partials[b];
    out.coordinateSet = plan.assignments[b];
    try {
      LabeledDataset slice = slice_dataset(data, plan.assignments[b]);
      const auto& g0 = slice.items.front();
      const std::uint64_t batchSeed = mix_seed(seed, static_cast<std::uint64_t>(b));
      ModelParams init;
      init.pooling = init_pooling(initScheme, L, g0.gridH, g0.gridW, g0.codeDim(), batchSeed);
      init.classifier = make_classifier(slice.classCount, init.pooling.featureLength());
      TrainResult result = train_joint(slice, std::move(init), batchHyper, optimizer);
      out.pooling = std::move(result.model.pooling);
    } catch (const NumericError& e) {
      out.error = e.what();
    }
  };

  if (workerCount == 1 || batchCount == 1) {
    for (int b = 0; b < batchCount; ++b) trainOne(b);
  } else {
    std::atomic<int> next{0};
    auto worker = [&] {
      for (;;) {
        const int b = next.fetch_add(1);
        if (b >= batchCount) return;
        trainOne(b);
      }
    };
    std::vector<std::thread> pool;
    const int workers = std::min(workerCount, batchCount);
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return partials;
}

Matrix assemble_features(const LabeledDataset& data, const std::vector<PartialModel>& partials,
                         int threads) {
  if (partials.empty()) throw std::invalid_argument("assemble_features: no partial models");
  if (data.items.empty()) throw std::invalid_argument("assemble_features: empty dataset");
  const int K = data.items.front().codeDim();

  Eigen::Index featureLength = 0;
  for (const PartialModel& p : partials) {
    if (p.failed()) throw std::invalid_argument("assemble_features: batch failed: " + p.error);
    if (static_cast<int>(p.coordinateSet.size()) != p.pooling.codeDim())
      throw std::invalid_argument("assemble_features: coordinate/pooling width mismatch");
    for (int c : p.coordinateSet) {
      if (c < 0 || c >= K)
        throw std::invalid_argument("assemble_features: coordinate " + std::to_string(c) +
                                    " out of range for K = " + std::to_string(K));
    }
    featureLength += p.pooling.featureLength();
  }

  Matrix features(static_cast<Eigen::Index>(data.items.size()), featureLength);
  parallel_for(data.items.size(), threads, [&](std::size_t i) {
    const CodeGrid& grid = data.items[i];
    Eigen::Index off = 0;
    for (const PartialModel& p : partials) {
      CodeGrid sliced;
      sliced.gridH = grid.gridH;
      sliced.gridW = grid.gridW;
      sliced.codes.resize(grid.codes.rows(), static_cast<Eigen::Index>(p.coordinateSet.size()));
      for (std::size_t k = 0; k < p.coordinateSet.size(); ++k)
        sliced.codes.col(static_cast<Eigen::Index>(k)) = grid.codes.col(p.coordinateSet[k]);
      features.row(static_cast<Eigen::Index>(i)).segment(off, p.pooling.featureLength()) =
          pool_all(p.pooling, sliced);
      off += p.pooling.featureLength();
    }
  });
  return features;
}

namespace {

struct StandardizeInfo {
  Vector mean;
  Vector scale;  // 1/std
};

StandardizeInfo standardize(Matrix& features) {
  StandardizeInfo info;
  info.mean = features.colwise().mean();
  features.rowwise() -= info.mean.transpose();
  Vector var = features.array().square().colwise().mean();
  info.scale = (var.array() + 1e-12).rsqrt();
  features *= info.scale.asDiagonal();
  return info;
}

// Folds the standardization x -> (x - mean) .* scale back into (theta, bias).
void fold_standardization(ClassifierParams& c, const StandardizeInfo& info) {
  c.theta *= info.scale.asDiagonal();
  if (c.includeBias) c.bias -= c.theta * info.mean;
}

}  // namespace

ClassifierParams retrain_classifier(const Matrix& features, const std::vector<int>& labels,
                                    int classCount, ClassifierKind kind,
                                    const Hyperparams& hyper) {
  if (features.rows() == 0) throw std::invalid_argument("retrain_classifier: empty feature set");
  if (static_cast<std::size_t>(features.rows()) != labels.size())
    throw std::invalid_argument("retrain_classifier: feature/label count mismatch");
  std::vector<char> seen(classCount, 0);
  for (int y : labels) {
    if (y < 0 || y >= classCount)
      throw std::invalid_argument("retrain_classifier: label out of range");
    seen[y] = 1;
  }
  if (std::count(seen.begin(), seen.end(), 1) < 2)
    throw std::invalid_argument("retrain_classifier: need samples from at least 2 classes");

  Matrix std_features = features;
  const StandardizeInfo info = standardize(std_features);

  ClassifierParams out =
      kind == ClassifierKind::Softmax
          ? detail::train_softmax_classifier(std_features, labels, classCount, hyper)
          : detail::train_svm_classifier(std_features, labels, classCount, hyper);
  fold_standardization(out, info);
  return out;
}

TransferReport transfer_pooling(const std::vector<PartialModel>& sourcePooling,
                                const LabeledDataset& targetTrain,
                                const LabeledDataset& targetTest, ClassifierKind kind,
                                const Hyperparams& hyper, const std::string& sourceId,
                                const std::string& targetId) {
  Matrix trainFeatures = assemble_features(targetTrain, sourcePooling, hyper.threads);
  Matrix testFeatures = assemble_features(targetTest, sourcePooling, hyper.threads);
  ClassifierParams classifier =
      retrain_classifier(trainFeatures, targetTrain.labels, targetTrain.classCount, kind, hyper);

  TransferReport report;
  report.sourceId = sourceId;
  report.targetId = targetId;
  report.classifierKind = kind == ClassifierKind::Softmax ? "softmax" : "linear_svm";
  report.accuracyPercent =
      100.0 * classification_accuracy(classifier, testFeatures, targetTest.labels);
  return report;
}

}  // namespace pc
