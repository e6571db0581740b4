#pragma once

#include <cstdint>
#include <vector>

#include "pc/objective.hpp"

namespace pc {

enum class Optimizer { ProjectedGD, Lbfgs };

/// Clamps every pooling weight to [0,1] in place; returns how many entries
/// changed. Idempotent (the Euclidean projection onto the unit cube).
long project_box(PoolingWeights& weights);

struct TraceRow {
  int iter = 0;
  double objective = 0.0;
  double dataLoss = 0.0;
  double thetaL2 = 0.0;
  double wL2 = 0.0;
  double smooth = 0.0;
  long clamped = 0;
};

struct TrainResult {
  ModelParams model;
  std::vector<TraceRow> trace;  // row 0 is the initial objective
};

/// Joint training of pooling weights and classifier.
///  - ProjectedGD: backtracked gradient step (Armijo, halving from gamma),
///    then box projection of the pooling block. The trace never increases.
///  - Lbfgs: limited-memory BFGS (history 10, strong-Wolfe line search) on the
///    unconstrained variables; the pooling block is projected after each
///    accepted step and the history is reset whenever the projection moves any
///    coordinate by more than 1e-12. A projected backtracking fallback keeps
///    accepted steps non-increasing.
/// Throws NumericError (with the iteration index) on a non-finite objective
/// or gradient.
TrainResult train_joint(const LabeledDataset& data, ModelParams init, const Hyperparams& hyper,
                        Optimizer optimizer);

struct FiniteDiffReport {
  double maxRelError = 0.0;
  int checked = 0;
  int skippedBoundary = 0;
};

/// Central-difference check of the analytic gradient on a random subsample of
/// at least `sampleCount` coordinates (all coordinates when fewer exist).
/// Pooling coordinates whose +/-h neighborhood leaves [0,1] are skipped and
/// counted, so the projection stays inactive at every probed point.
FiniteDiffReport finite_diff_check(const ModelParams& model, const LabeledDataset& data,
                                   const Hyperparams& hyper, double h, int sampleCount = 200,
                                   std::uint64_t seed = 0);

}  // namespace pc
