#include "pc/image.hpp"

#include <cmath>

namespace pc {

PatchGrid extract_patches(const Image& image, int patchSide, int stride) {
  if (patchSide <= 0 || patchSide > image.width || patchSide > image.height) {
    throw std::invalid_argument("extract_patches: patch side " + std::to_string(patchSide) +
                                " exceeds image " + std::to_string(image.width) + "x" +
                                std::to_string(image.height));
  }
  if (stride < 1) throw std::invalid_argument("extract_patches: stride must be >= 1");

  PatchGrid out;
  out.gridH = (image.height - patchSide) / stride + 1;
  out.gridW = (image.width - patchSide) / stride + 1;
  const int dim = patchSide * patchSide * image.channels;
  out.patches.resize(out.count(), dim);

  for (int gr = 0; gr < out.gridH; ++gr) {
    for (int gc = 0; gc < out.gridW; ++gc) {
      const int row = gr * out.gridW + gc;
      int d = 0;
      for (int ch = 0; ch < image.channels; ++ch)
        for (int py = 0; py < patchSide; ++py)
          for (int px = 0; px < patchSide; ++px)
            out.patches(row, d++) = image.at(ch, gr * stride + py, gc * stride + px);
    }
  }
  return out;
}

Vector normalize_patch(const Vector& patch, double varFloor) {
  if (!(varFloor > 0.0)) throw std::invalid_argument("normalize_patch: varFloor must be > 0");
  const double mean = patch.mean();
  const double var = (patch.array() - mean).square().mean();
  return (patch.array() - mean) / std::sqrt(var + varFloor);
}

void normalize_patches(Matrix& patches, double varFloor) {
  if (!(varFloor > 0.0)) throw std::invalid_argument("normalize_patches: varFloor must be > 0");
  const double dim = static_cast<double>(patches.cols());
  for (Eigen::Index i = 0; i < patches.rows(); ++i) {
    auto row = patches.row(i);
    const double mean = row.mean();
    row.array() -= mean;
    const double var = row.squaredNorm() / dim;
    row /= std::sqrt(var + varFloor);
  }
}

}  // namespace pc
