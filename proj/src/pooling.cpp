#include "pc/pooling.hpp"

#include <algorithm>
#include <random>

namespace pc {

Vector pool_unit(const Matrix& unitWeights, const CodeGrid& grid) {
  if (unitWeights.rows() != grid.codes.rows() || unitWeights.cols() != grid.codes.cols()) {
    throw std::invalid_argument("pool_unit: weights " + std::to_string(unitWeights.rows()) +
                                "x" + std::to_string(unitWeights.cols()) +
                                " do not match codes " + std::to_string(grid.codes.rows()) +
                                "x" + std::to_string(grid.codes.cols()));
  }
  return unitWeights.cwiseProduct(grid.codes).colwise().sum();
}

Vector pool_all(const PoolingWeights& weights, const CodeGrid& grid) {
  const int L = weights.unitCount();
  const int K = grid.codeDim();
  Vector out(static_cast<Eigen::Index>(L) * K);
  for (int l = 0; l < L; ++l) out.segment(static_cast<Eigen::Index>(l) * K, K) = pool_unit(weights.units[l], grid);
  return out;
}

PoolingWeights init_pooling(const InitScheme& scheme, int L, int gridH, int gridW, int K,
                            std::uint64_t seed) {
  if (L < 1 || gridH < 1 || gridW < 1 || K < 1)
    throw std::invalid_argument("init_pooling: dimensions must be positive");

  PoolingWeights w;
  w.gridH = gridH;
  w.gridW = gridW;
  const int M = gridH * gridW;

  switch (scheme.kind) {
    case InitKind::SpmQuadrants: {
      if (L != 4) throw std::invalid_argument("init_pooling: spm_quadrants requires L = 4");
      const int splitR = gridH / 2;
      const int splitC = gridW / 2;
      w.units.assign(4, Matrix::Zero(M, K));
      for (int r = 0; r < gridH; ++r) {
        for (int c = 0; c < gridW; ++c) {
          const int quadrant = (r >= splitR ? 2 : 0) + (c >= splitC ? 1 : 0);
          w.units[quadrant].row(r * gridW + c).setOnes();
        }
      }
      break;
    }
    case InitKind::SpmWhole:
      w.units.assign(L, Matrix::Ones(M, K));
      break;
    case InitKind::RandomGaussian: {
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> dist(scheme.mean, scheme.stddev);
      w.units.assign(L, Matrix(M, K));
      for (int l = 0; l < L; ++l)
        for (int j = 0; j < M; ++j)
          for (int k = 0; k < K; ++k)
            w.units[l](j, k) = std::clamp(dist(rng), 0.0, 1.0);
      break;
    }
    case InitKind::Constant:
      w.units.assign(L, Matrix::Constant(M, K, scheme.value));
      break;
  }
  return w;
}

namespace {

// Block index along one axis: blocks of size S, trailing remainder folded
// into the last block.
inline int block_of(int index, int S, int blockCount) {
  return std::min(index / S, blockCount - 1);
}

}  // namespace

CodeGrid prepool(const CodeGrid& grid, int S) {
  if (S < 1) throw std::invalid_argument("prepool: S must be >= 1");
  if (S == 1) return grid;

  CodeGrid out;
  out.gridH = std::max(1, grid.gridH / S);
  out.gridW = std::max(1, grid.gridW / S);
  out.codes = Matrix::Zero(out.gridH * out.gridW, grid.codes.cols());
  for (int r = 0; r < grid.gridH; ++r) {
    const int br = block_of(r, S, out.gridH);
    for (int c = 0; c < grid.gridW; ++c) {
      const int bc = block_of(c, S, out.gridW);
      out.codes.row(br * out.gridW + bc) += grid.codes.row(r * grid.gridW + c);
    }
  }
  return out;
}

PoolingWeights prepool_weights(const PoolingWeights& weights, int S) {
  if (S < 1) throw std::invalid_argument("prepool_weights: S must be >= 1");
  if (S == 1) return weights;

  PoolingWeights out;
  out.gridH = std::max(1, weights.gridH / S);
  out.gridW = std::max(1, weights.gridW / S);
  out.units.assign(weights.unitCount(), Matrix(out.gridH * out.gridW, weights.codeDim()));
  for (int l = 0; l < weights.unitCount(); ++l)
    for (int br = 0; br < out.gridH; ++br)
      for (int bc = 0; bc < out.gridW; ++bc)
        out.units[l].row(br * out.gridW + bc) =
            weights.units[l].row(br * S * weights.gridW + bc * S);
  return out;
}

}  // namespace pc
