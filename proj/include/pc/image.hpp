#pragma once

#include <vector>

#include "pc/common.hpp"

namespace pc {

/// Dense image with channel-planar pixel storage (all of channel 0 row-major,
/// then channel 1, ...). Values are expected in [0,1].
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> pixels;

  double at(int channel, int row, int col) const {
    return pixels[static_cast<std::size_t>(channel) * width * height +
                  static_cast<std::size_t>(row) * width + col];
  }
  std::size_t pixelCount() const {
    return static_cast<std::size_t>(width) * height * channels;
  }
};

/// Patches from one image on a dense grid. Row j of `patches` is the flattened
/// window at grid position (j / gridW, j % gridW); flattening is channel-planar
/// and row-major within a channel, matching Image storage.
struct PatchGrid {
  int gridH = 0;
  int gridW = 0;
  Matrix patches;  // M x (side*side*channels), M = gridH*gridW

  int count() const { return gridH * gridW; }
};

/// Slides a patchSide x patchSide window over the image with the given stride.
/// Grid dimensions are (H-p)/s+1 by (W-p)/s+1.
PatchGrid extract_patches(const Image& image, int patchSide, int stride);

/// Subtracts the patch mean and divides by sqrt(variance + varFloor).
/// Variance is the population variance. varFloor must be positive.
Vector normalize_patch(const Vector& patch, double varFloor);

/// Row-wise normalize_patch over a patch matrix, in place.
void normalize_patches(Matrix& patches, double varFloor);

}  // namespace pc
