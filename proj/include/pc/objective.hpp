#pragma once

#include <vector>

#include "pc/classifier.hpp"
#include "pc/pooling.hpp"

namespace pc {

/// Joint model: pooling weights plus the classifier on top of pooled features.
struct ModelParams {
  PoolingWeights pooling;
  ClassifierParams classifier;
};

struct Hyperparams {
  double alpha1 = 0.0;  // classifier L2
  double alpha2 = 0.0;  // pooling-weight L2
  double alpha3 = 0.0;  // spatial smoothness
  double gamma = 1.0;   // gradient-descent step size (backtracked)
  int maxIters = 3000;
  int prepoolS = 1;
  int batchWidthD = 0;  // 0 means the full code dimension
  // Artifact knobs, not part of the objective.
  double tolGrad = 1e-9;   // stop when ||projected grad|| <= tolGrad * max(1, ||x||)
  double tolObj = 0.0;     // stop when relative decrease < tolObj (0 disables)
  int threads = 0;         // 0 = hardware concurrency
};

/// Code grids with class labels. All grids must share (gridH, gridW, K).
struct LabeledDataset {
  std::vector<CodeGrid> items;
  std::vector<int> labels;
  int classCount = 0;

  std::size_t size() const { return items.size(); }
};

/// Objective value split into its terms. `total` is
/// dataLoss + alpha1/2*thetaL2 + alpha2/2*wL2 + alpha3/2*smooth.
struct ObjectiveTerms {
  double total = 0.0;
  double dataLoss = 0.0;
  double thetaL2 = 0.0;  // ||Theta||^2 (unweighted)
  double wL2 = 0.0;      // ||W||^2 (unweighted)
  double smooth = 0.0;   // sum of squared forward differences (unweighted)
};

struct Gradients {
  std::vector<Matrix> w;  // per unit, M x K
  Matrix theta;           // C x F
  Vector bias;            // C (zero-length when bias disabled)
};

/// Mean negative log-likelihood of the true labels under pool_all -> softmax.
double data_loss(const ModelParams& model, const LabeledDataset& data, int threads = 0);

/// Sum of squared forward differences of every (unit, coordinate) weight map,
/// horizontal and vertical, without wraparound.
double smoothness_penalty(const PoolingWeights& weights);

/// Full regularized objective with term breakdown.
ObjectiveTerms full_objective(const ModelParams& model, const LabeledDataset& data,
                              const Hyperparams& hyper);

/// Analytic gradient of the full objective for both parameter blocks.
Gradients gradient(const ModelParams& model, const LabeledDataset& data,
                   const Hyperparams& hyper);

/// Single pass computing the objective terms and, when grads != nullptr, the
/// gradient. Item contributions are accumulated over fixed-size index chunks
/// combined in chunk order, so results do not depend on the thread count.
ObjectiveTerms evaluate_objective(const ModelParams& model, const LabeledDataset& data,
                                  const Hyperparams& hyper, Gradients* grads);

}  // namespace pc
