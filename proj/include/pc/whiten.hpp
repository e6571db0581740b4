#pragma once

#include "pc/common.hpp"

namespace pc {

/// ZCA whitening transform: x -> matrix * (x - mean). The matrix is symmetric
/// by construction (V diag(1/sqrt(lambda+epsilon)) V^T of the covariance).
struct WhitenTransform {
  Vector mean;
  Matrix matrix;
  double epsilon = 0.0;

  int dim() const { return static_cast<int>(mean.size()); }
};

/// Fits a ZCA transform on the rows of `patches` (population covariance).
/// Requires at least dim+1 rows and epsilon > 0.
WhitenTransform fit_zca(const Matrix& patches, double epsilon);

/// Applies the transform to one patch.
Vector whiten_apply(const WhitenTransform& wt, const Vector& patch);

/// Applies the transform to every row of `patches`, in place.
void whiten_apply_rows(const WhitenTransform& wt, Matrix& patches);

}  // namespace pc
