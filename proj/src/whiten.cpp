#include "pc/whiten.hpp"

#include <cmath>

namespace pc {

WhitenTransform fit_zca(const Matrix& patches, double epsilon) {
  const Eigen::Index n = patches.rows();
  const Eigen::Index dim = patches.cols();
  if (n < dim + 1) {
    throw std::invalid_argument("fit_zca: need at least dim+1 patches, got " +
                                std::to_string(n) + " for dim " + std::to_string(dim));
  }
  if (!(epsilon > 0.0)) throw std::invalid_argument("fit_zca: epsilon must be > 0");

  WhitenTransform wt;
  wt.epsilon = epsilon;
  wt.mean = patches.colwise().mean();
  Matrix centered = patches.rowwise() - wt.mean.transpose();
  Matrix cov = (centered.transpose() * centered) / static_cast<double>(n);

  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) throw NumericError("fit_zca: eigendecomposition failed");

  Vector scale(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double lambda = std::max(eig.eigenvalues()[i], 0.0);
    scale[i] = 1.0 / std::sqrt(lambda + epsilon);
  }
  wt.matrix = eig.eigenvectors() * scale.asDiagonal() * eig.eigenvectors().transpose();
  return wt;
}

Vector whiten_apply(const WhitenTransform& wt, const Vector& patch) {
  if (patch.size() != wt.mean.size())
    throw std::invalid_argument("whiten_apply: patch dimension mismatch");
  return ((patch - wt.mean).transpose() * wt.matrix).transpose();
}

void whiten_apply_rows(const WhitenTransform& wt, Matrix& patches) {
  if (patches.cols() != wt.mean.size())
    throw std::invalid_argument("whiten_apply_rows: patch dimension mismatch");
  patches.rowwise() -= wt.mean.transpose();
  // Row-at-a-time products keep equal input rows bitwise equal in the output
  // (blocked matrix products do not).
  Eigen::RowVectorXd tmp(patches.cols());
  for (Eigen::Index i = 0; i < patches.rows(); ++i) {
    tmp.noalias() = patches.row(i) * wt.matrix;
    patches.row(i) = tmp;
  }
}

}  // namespace pc
