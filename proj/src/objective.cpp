#include "pc/objective.hpp"

#include <cmath>

#include "pc/parallel.hpp"

namespace pc {
namespace {

constexpr std::size_t kChunk = 128;

void check_shapes(const ModelParams& model, const LabeledDataset& data) {
  if (data.items.empty()) throw std::invalid_argument("objective: empty dataset");
  if (data.items.size() != data.labels.size())
    throw std::invalid_argument("objective: item/label count mismatch");
  const auto& g0 = data.items.front();
  if (model.pooling.gridH != g0.gridH || model.pooling.gridW != g0.gridW ||
      model.pooling.codeDim() != g0.codeDim())
    throw std::invalid_argument("objective: pooling/grid shape mismatch");
  if (model.classifier.featureLength() != model.pooling.featureLength())
    throw std::invalid_argument("objective: classifier feature length mismatch");
  if (model.classifier.classCount() != data.classCount)
    throw std::invalid_argument("objective: class count mismatch");
  for (std::size_t i = 0; i < data.items.size(); ++i) {
    const auto& g = data.items[i];
    if (g.gridH != g0.gridH || g.gridW != g0.gridW || g.codeDim() != g0.codeDim())
      throw std::invalid_argument("objective: item " + std::to_string(i) +
                                  " grid shape differs from the first item");
    if (data.labels[i] < 0 || data.labels[i] >= data.classCount)
      throw std::invalid_argument("objective: label out of range at item " + std::to_string(i));
  }
}

struct ChunkAccum {
  double loss = 0.0;
  Matrix theta;
  Vector bias;
  std::vector<Matrix> w;
};

// Smoothness term and (optionally) its unweighted gradient 2*(forward-difference
// divergence) accumulated into gradUnits.
double smoothness_with_grad(const PoolingWeights& weights, std::vector<Matrix>* gradUnits,
                            double factor) {
  const int H = weights.gridH;
  const int W = weights.gridW;
  const int K = weights.codeDim();
  double penalty = 0.0;
  for (int l = 0; l < weights.unitCount(); ++l) {
    const Matrix& wm = weights.units[l];
    Matrix* gm = gradUnits ? &(*gradUnits)[l] : nullptr;
    for (int k = 0; k < K; ++k) {
      for (int r = 0; r < H; ++r) {
        for (int c = 0; c < W; ++c) {
          const int j = r * W + c;
          if (c + 1 < W) {
            const double d = wm(j + 1, k) - wm(j, k);
            penalty += d * d;
            if (gm) {
              (*gm)(j + 1, k) += factor * 2.0 * d;
              (*gm)(j, k) -= factor * 2.0 * d;
            }
          }
          if (r + 1 < H) {
            const double d = wm(j + W, k) - wm(j, k);
            penalty += d * d;
            if (gm) {
              (*gm)(j + W, k) += factor * 2.0 * d;
              (*gm)(j, k) -= factor * 2.0 * d;
            }
          }
        }
      }
    }
  }
  return penalty;
}

}  // namespace

double smoothness_penalty(const PoolingWeights& weights) {
  return smoothness_with_grad(weights, nullptr, 0.0);
}

ObjectiveTerms evaluate_objective(const ModelParams& model, const LabeledDataset& data,
                                  const Hyperparams& hyper, Gradients* grads) {
  check_shapes(model, data);

  const int L = model.pooling.unitCount();
  const int K = model.pooling.codeDim();
  const int M = model.pooling.positionCount();
  const int C = data.classCount;
  const std::size_t n = data.size();
  const double invN = 1.0 / static_cast<double>(n);
  const bool wantGrad = grads != nullptr;
  const bool bias = model.classifier.includeBias;

  const std::size_t chunkCount = (n + kChunk - 1) / kChunk;
  std::vector<ChunkAccum> acc(chunkCount);

  parallel_chunks(n, kChunk, hyper.threads, [&](std::size_t ci, std::size_t begin, std::size_t end) {
    ChunkAccum& a = acc[ci];
    if (wantGrad) {
      a.theta = Matrix::Zero(C, static_cast<Eigen::Index>(L) * K);
      if (bias) a.bias = Vector::Zero(C);
      a.w.assign(L, Matrix::Zero(M, K));
    }
    Vector a_i(static_cast<Eigen::Index>(L) * K);
    for (std::size_t i = begin; i < end; ++i) {
      const CodeGrid& grid = data.items[i];
      const int y = data.labels[i];
      // contiguous column dot products; faster than a broadcast product
      for (int l = 0; l < L; ++l)
        for (int k = 0; k < K; ++k)
          a_i[static_cast<Eigen::Index>(l) * K + k] =
              model.pooling.units[l].col(k).dot(grid.codes.col(k));
      Vector z = model.classifier.theta * a_i;
      if (bias) z += model.classifier.bias;
      const double zmax = z.maxCoeff();
      Vector expz = (z.array() - zmax).exp();
      const double sum = expz.sum();
      a.loss += -(z[y] - zmax - std::log(sum));
      if (!wantGrad) continue;

      Vector dz = expz / sum;
      dz[y] -= 1.0;
      a.theta.noalias() += dz * a_i.transpose();
      if (bias) a.bias += dz;
      Vector da = model.classifier.theta.transpose() * dz;
      for (int l = 0; l < L; ++l)
        for (int k = 0; k < K; ++k)
          a.w[l].col(k) += da[static_cast<Eigen::Index>(l) * K + k] * grid.codes.col(k);
    }
  });

  ObjectiveTerms terms;
  if (wantGrad) {
    grads->theta = Matrix::Zero(C, static_cast<Eigen::Index>(L) * K);
    grads->bias = bias ? Vector::Zero(C) : Vector();
    grads->w.assign(L, Matrix::Zero(M, K));
  }
  for (const ChunkAccum& a : acc) {
    terms.dataLoss += a.loss;
    if (wantGrad) {
      grads->theta += a.theta;
      if (bias) grads->bias += a.bias;
      for (int l = 0; l < L; ++l) grads->w[l] += a.w[l];
    }
  }
  terms.dataLoss *= invN;
  if (wantGrad) {
    grads->theta *= invN;
    if (bias) grads->bias *= invN;
    for (int l = 0; l < L; ++l) grads->w[l] *= invN;
    grads->theta += hyper.alpha1 * model.classifier.theta;  // bias is not penalized
    for (int l = 0; l < L; ++l) grads->w[l] += hyper.alpha2 * model.pooling.units[l];
  }

  terms.thetaL2 = model.classifier.theta.squaredNorm();
  for (const Matrix& u : model.pooling.units) terms.wL2 += u.squaredNorm();
  terms.smooth = smoothness_with_grad(model.pooling, wantGrad ? &grads->w : nullptr,
                                      hyper.alpha3 / 2.0);
  terms.total = terms.dataLoss + 0.5 * hyper.alpha1 * terms.thetaL2 +
                0.5 * hyper.alpha2 * terms.wL2 + 0.5 * hyper.alpha3 * terms.smooth;
  return terms;
}

double data_loss(const ModelParams& model, const LabeledDataset& data, int threads) {
  Hyperparams h;
  h.threads = threads;
  return evaluate_objective(model, data, h, nullptr).dataLoss;
}

ObjectiveTerms full_objective(const ModelParams& model, const LabeledDataset& data,
                              const Hyperparams& hyper) {
  return evaluate_objective(model, data, hyper, nullptr);
}

Gradients gradient(const ModelParams& model, const LabeledDataset& data,
                   const Hyperparams& hyper) {
  Gradients g;
  evaluate_objective(model, data, hyper, &g);
  return g;
}

}  // namespace pc
