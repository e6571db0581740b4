#pragma once

#include <cstdint>
#include <vector>

#include "pc/encode.hpp"

namespace pc {

/// Spatial pooling weights: one M x K weight matrix per pooling unit, sharing
/// the CodeGrid position convention (j = row*gridW + col). Feasible weights
/// live in [0,1]; project_box (optimize.hpp) restores feasibility.
struct PoolingWeights {
  int gridH = 0;
  int gridW = 0;
  std::vector<Matrix> units;  // L entries, each M x K

  int unitCount() const { return static_cast<int>(units.size()); }
  int positionCount() const { return gridH * gridW; }
  int codeDim() const { return units.empty() ? 0 : static_cast<int>(units[0].cols()); }
  /// Pooled feature length L*K.
  int featureLength() const { return unitCount() * codeDim(); }
};

enum class InitKind { SpmQuadrants, SpmWhole, RandomGaussian, Constant };

struct InitScheme {
  InitKind kind = InitKind::SpmQuadrants;
  double mean = 0.5;    // RandomGaussian
  double stddev = 0.1;  // RandomGaussian
  double value = 1.0;   // Constant
};

/// Weighted-sum pooling of one unit: sum_j weights(j,:) .* codes(j,:).
Vector pool_unit(const Matrix& unitWeights, const CodeGrid& grid);

/// Concatenates pool_unit over all units, in unit order; length L*K.
Vector pool_all(const PoolingWeights& weights, const CodeGrid& grid);

/// Builds initial pooling weights.
///  - SpmQuadrants (L must be 4): indicator of the unit's quadrant, identical
///    across code coordinates. Rows/cols split at floor(dim/2); the larger
///    half goes to the bottom/right quadrant. Unit order: TL, TR, BL, BR.
///  - SpmWhole: all ones.
///  - RandomGaussian: i.i.d. N(mean, stddev^2) clamped to [0,1].
///  - Constant: uniform fill with `value`.
PoolingWeights init_pooling(const InitScheme& scheme, int L, int gridH, int gridW, int K,
                            std::uint64_t seed);

/// Sums codes over S x S spatial blocks, shrinking the grid by S per side.
/// Trailing rows/cols that do not fill a block are folded into the last block.
CodeGrid prepool(const CodeGrid& grid, int S);

/// Downsamples a pooling-weight tensor to the prepooled grid by taking the
/// top-left entry of each S x S block. For block-constant weights, pooling the
/// prepooled grid with the result equals pooling the original grid.
PoolingWeights prepool_weights(const PoolingWeights& weights, int S);

}  // namespace pc
