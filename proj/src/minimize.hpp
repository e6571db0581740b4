#pragma once

// Internal smooth-minimization core shared by joint training and the
// feature-space classifier trainers. Not installed.

#include <functional>

#include "pc/objective.hpp"

namespace pc::detail {

/// Objective evaluation: returns f(x); fills *grad when non-null and *terms
/// (for trace reporting) when non-null.
using EvalFn = std::function<double(const Vector&, Vector*, ObjectiveTerms*)>;

/// Clamps the leading boxDim coordinates to [0,1]. Returns (changed count,
/// largest change).
std::pair<long, double> project_flat(Vector& x, Eigen::Index boxDim);

struct IterationHook {
  std::function<void(int, double, const ObjectiveTerms&, long)> onAccept;
};

struct MinimizeResult {
  Vector x;
  double f = 0.0;
};

/// Limited-memory BFGS (history 10, strong-Wolfe line search) with the leading
/// boxDim coordinates projected onto [0,1] after each accepted step. The
/// history is reset whenever projection moves a coordinate by more than 1e-12;
/// a projected backtracking fallback keeps accepted objectives non-increasing.
/// boxDim == 0 gives plain unconstrained L-BFGS.
MinimizeResult minimize_lbfgs(const EvalFn& eval, Vector x, Eigen::Index boxDim, int maxIters,
                              double tolGrad, double tolObj, const IterationHook& hook);

/// Projected gradient descent with Armijo backtracking (halving from gamma).
MinimizeResult minimize_projected_gd(const EvalFn& eval, Vector x, Eigen::Index boxDim,
                                     int maxIters, double gamma, double tolGrad, double tolObj,
                                     const IterationHook& hook);

}  // namespace pc::detail
