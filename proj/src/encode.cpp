#include "pc/encode.hpp"

#include <cmath>

namespace pc {

Vector triangle_encode(const Vector& patch, const Dictionary& dict) {
  if (patch.size() != dict.centroids.cols())
    throw std::invalid_argument("triangle_encode: patch dimension mismatch");
  Vector z = (dict.centroids.rowwise() - patch.transpose()).rowwise().norm();
  const double mu = z.mean();
  return (mu - z.array()).max(0.0);
}

Matrix triangle_encode_rows(const Matrix& patches, const Dictionary& dict) {
  if (patches.cols() != dict.centroids.cols())
    throw std::invalid_argument("triangle_encode_rows: patch dimension mismatch");
  // Encodes row by row so equal patches always receive bitwise-equal codes.
  Matrix codes(patches.rows(), dict.centroids.rows());
  Vector z(dict.centroids.rows());
  for (Eigen::Index i = 0; i < patches.rows(); ++i) {
    z = (dict.centroids.rowwise() - patches.row(i)).rowwise().norm();
    const double mu = z.mean();
    codes.row(i) = (mu - z.array()).max(0.0);
  }
  return codes;
}

CodeGrid encode_image(const Image& image, const Dictionary& dict, const WhitenTransform& wt,
                      int patchSide) {
  PatchGrid grid = extract_patches(image, patchSide, 1);
  grid.patches *= kPatchScale;
  normalize_patches(grid.patches, kNormVarFloor);
  whiten_apply_rows(wt, grid.patches);

  CodeGrid out;
  out.gridH = grid.gridH;
  out.gridW = grid.gridW;
  out.codes = triangle_encode_rows(grid.patches, dict);
  return out;
}

}  // namespace pc
