#pragma once

#include "pc/image.hpp"
#include "pc/kmeans.hpp"
#include "pc/whiten.hpp"

namespace pc {

/// Spatially arranged codes of one image: row j of `codes` is the K-dimensional
/// code at grid position (j / gridW, j % gridW).
struct CodeGrid {
  int gridH = 0;
  int gridW = 0;
  Matrix codes;  // M x K

  int positionCount() const { return gridH * gridW; }
  int codeDim() const { return static_cast<int>(codes.cols()); }
};

/// Patch values are rescaled to 0-255 before per-patch normalization, and the
/// normalizer adds 10 to the variance; both follow the usual single-layer
/// K-means feature pipeline for byte images loaded as [0,1] reals.
inline constexpr double kPatchScale = 255.0;
inline constexpr double kNormVarFloor = 10.0;

/// Triangle activation: z_k = ||patch - c_k||, code_k = max(0, mean(z) - z_k).
Vector triangle_encode(const Vector& patch, const Dictionary& dict);

/// Triangle-encodes every row of `patches` against the dictionary.
Matrix triangle_encode_rows(const Matrix& patches, const Dictionary& dict);

/// Full per-image encoding: dense unit-stride patches, 0-255 rescale,
/// per-patch normalization, ZCA whitening, triangle coding.
CodeGrid encode_image(const Image& image, const Dictionary& dict,
                      const WhitenTransform& wt, int patchSide);

}  // namespace pc
