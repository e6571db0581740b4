#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pc/optimize.hpp"

namespace pc {

/// Partition of the K code coordinates into width-D batches. Without
/// redundancy the assignments are K/D contiguous blocks; with redundancy a
/// second partition over a seeded permutation of the coordinates is appended,
/// doubling the batch count.
struct BatchPlan {
  int K = 0;
  int D = 0;
  bool redundant = false;
  std::uint64_t permutationSeed = 0;
  std::vector<std::vector<int>> assignments;

  int batchCount() const { return static_cast<int>(assignments.size()); }
};

BatchPlan make_plan(int K, int D, bool redundant, std::uint64_t seed);

/// Restricts every code grid to the listed coordinates; spatial layout and
/// labels are unchanged.
LabeledDataset slice_dataset(const LabeledDataset& data, const std::vector<int>& coords);

/// One trained batch. The classifier from batch training is discarded; only
/// the pooling weights take part in feature assembly.
struct PartialModel {
  std::vector<int> coordinateSet;
  PoolingWeights pooling;
  std::string error;  // non-empty if this batch failed numerically

  bool failed() const { return !error.empty(); }
};

/// Trains every batch of the plan independently on its coordinate slice.
/// Batch b uses seed mix_seed(seed, b); results are identical for any
/// workerCount. A batch that throws NumericError is recorded as failed and the
/// remaining batches still complete.
std::vector<PartialModel> train_batches(const LabeledDataset& data, const BatchPlan& plan,
                                        const Hyperparams& hyper, const InitScheme& initScheme,
                                        Optimizer optimizer, std::uint64_t seed, int workerCount,
                                        int unitCount = 4);

/// Per-image concatenation of pool_all over all partial models, in plan order.
/// Feature length is batchCount * L * D.
Matrix assemble_features(const LabeledDataset& data, const std::vector<PartialModel>& partials,
                         int threads = 0);

enum class ClassifierKind { Softmax, LinearSvm };

/// Trains only the classifier on precomputed pooled features.
///  - Softmax: multinomial logistic regression with alpha1/2*||Theta||^2.
///  - LinearSvm: one-vs-rest squared-hinge SVM with alpha1/2*||w||^2 per class.
/// Both run full-batch L-BFGS from zero parameters; features are standardized
/// internally and the scaling is folded back into the returned parameters.
ClassifierParams retrain_classifier(const Matrix& features, const std::vector<int>& labels,
                                    int classCount, ClassifierKind kind, const Hyperparams& hyper);

struct TransferReport {
  std::string sourceId;
  std::string targetId;
  std::string classifierKind;
  double accuracyPercent = 0.0;
};

/// Freezes the source pooling weights, pools the target codes, retrains the
/// classifier on the target training set and reports target test accuracy.
TransferReport transfer_pooling(const std::vector<PartialModel>& sourcePooling,
                                const LabeledDataset& targetTrain,
                                const LabeledDataset& targetTest, ClassifierKind kind,
                                const Hyperparams& hyper, const std::string& sourceId,
                                const std::string& targetId);

/// Wraps a full model's pooling weights as a single all-coordinates partial,
/// so full and batched models share the assembly/transfer path.
PartialModel as_partial(const PoolingWeights& pooling);

}  // namespace pc
