#include "pc/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "minimize.hpp"

namespace pc {
namespace {

// Flattened layout: pooling units (column-major M*K each, unit order), then
// theta column-major, then bias. The leading L*M*K block is box-constrained.
struct Packer {
  int L = 0, M = 0, K = 0, C = 0, F = 0;
  bool bias = false;

  static Packer of(const ModelParams& m) {
    Packer p;
    p.L = m.pooling.unitCount();
    p.M = m.pooling.positionCount();
    p.K = m.pooling.codeDim();
    p.C = m.classifier.classCount();
    p.F = m.classifier.featureLength();
    p.bias = m.classifier.includeBias;
    return p;
  }
  Eigen::Index boxDim() const { return static_cast<Eigen::Index>(L) * M * K; }
  Eigen::Index dim() const {
    return boxDim() + static_cast<Eigen::Index>(C) * F + (bias ? C : 0);
  }

  Vector pack(const ModelParams& m) const {
    Vector x(dim());
    Eigen::Index off = 0;
    for (int l = 0; l < L; ++l) {
      Eigen::Map<Matrix>(x.data() + off, M, K) = m.pooling.units[l];
      off += static_cast<Eigen::Index>(M) * K;
    }
    Eigen::Map<Matrix>(x.data() + off, C, F) = m.classifier.theta;
    off += static_cast<Eigen::Index>(C) * F;
    if (bias) x.segment(off, C) = m.classifier.bias;
    return x;
  }

  void unpack(const Vector& x, ModelParams& m) const {
    Eigen::Index off = 0;
    for (int l = 0; l < L; ++l) {
      m.pooling.units[l] = Eigen::Map<const Matrix>(x.data() + off, M, K);
      off += static_cast<Eigen::Index>(M) * K;
    }
    m.classifier.theta = Eigen::Map<const Matrix>(x.data() + off, C, F);
    off += static_cast<Eigen::Index>(C) * F;
    if (bias) m.classifier.bias = x.segment(off, C);
  }

  Vector pack_grads(const Gradients& g) const {
    Vector v(dim());
    Eigen::Index off = 0;
    for (int l = 0; l < L; ++l) {
      Eigen::Map<Matrix>(v.data() + off, M, K) = g.w[l];
      off += static_cast<Eigen::Index>(M) * K;
    }
    Eigen::Map<Matrix>(v.data() + off, C, F) = g.theta;
    off += static_cast<Eigen::Index>(C) * F;
    if (bias) v.segment(off, C) = g.bias;
    return v;
  }
};

}  // namespace

long project_box(PoolingWeights& weights) {
  long changed = 0;
  for (Matrix& unit : weights.units) {
    for (Eigen::Index i = 0; i < unit.size(); ++i) {
      const double clamped = std::clamp(unit.data()[i], 0.0, 1.0);
      if (clamped != unit.data()[i]) {
        unit.data()[i] = clamped;
        ++changed;
      }
    }
  }
  return changed;
}

TrainResult train_joint(const LabeledDataset& data, ModelParams init, const Hyperparams& hyper,
                        Optimizer optimizer) {
  if (hyper.maxIters < 1) throw std::invalid_argument("train_joint: maxIters must be >= 1");
  const Packer pk = Packer::of(init);

  ModelParams work = init;
  detail::EvalFn eval = [&](const Vector& x, Vector* grad, ObjectiveTerms* terms) {
    pk.unpack(x, work);
    if (grad == nullptr) {
      const ObjectiveTerms t = evaluate_objective(work, data, hyper, nullptr);
      if (terms) *terms = t;
      return t.total;
    }
    Gradients grads;
    const ObjectiveTerms t = evaluate_objective(work, data, hyper, &grads);
    *grad = pk.pack_grads(grads);
    if (terms) *terms = t;
    return t.total;
  };

  TrainResult result;
  detail::IterationHook hook;
  hook.onAccept = [&](int iter, double f, const ObjectiveTerms& terms, long clamped) {
    result.trace.push_back({iter, f, terms.dataLoss, terms.thetaL2, terms.wL2, terms.smooth,
                            clamped});
  };

  Vector x0 = pk.pack(init);
  detail::MinimizeResult out =
      optimizer == Optimizer::Lbfgs
          ? detail::minimize_lbfgs(eval, std::move(x0), pk.boxDim(), hyper.maxIters,
                                   hyper.tolGrad, hyper.tolObj, hook)
          : detail::minimize_projected_gd(eval, std::move(x0), pk.boxDim(), hyper.maxIters,
                                          hyper.gamma, hyper.tolGrad, hyper.tolObj, hook);

  result.model = std::move(init);
  pk.unpack(out.x, result.model);
  return result;
}

FiniteDiffReport finite_diff_check(const ModelParams& model, const LabeledDataset& data,
                                   const Hyperparams& hyper, double h, int sampleCount,
                                   std::uint64_t seed) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_check: h must be > 0");
  const Packer pk = Packer::of(model);
  Vector x = pk.pack(model);

  ModelParams work = model;
  auto value_at = [&](const Vector& v) {
    pk.unpack(v, work);
    return evaluate_objective(work, data, hyper, nullptr).total;
  };
  Gradients grads;
  pk.unpack(x, work);
  evaluate_objective(work, data, hyper, &grads);
  const Vector g = pk.pack_grads(grads);

  std::vector<Eigen::Index> coords(static_cast<std::size_t>(x.size()));
  std::iota(coords.begin(), coords.end(), Eigen::Index{0});
  if (static_cast<int>(coords.size()) > sampleCount) {
    std::mt19937_64 rng(seed);
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(sampleCount);
  }

  FiniteDiffReport report;
  Vector probe = x;
  for (const Eigen::Index idx : coords) {
    if (idx < pk.boxDim() && (x[idx] - h < 0.0 || x[idx] + h > 1.0)) {
      ++report.skippedBoundary;  // projection would be active at the probe
      continue;
    }
    probe[idx] = x[idx] + h;
    const double fp = value_at(probe);
    probe[idx] = x[idx] - h;
    const double fm = value_at(probe);
    probe[idx] = x[idx];
    const double numeric = (fp - fm) / (2.0 * h);
    const double rel = std::abs(g[idx] - numeric) / std::max(1e-8, std::abs(numeric));
    report.maxRelError = std::max(report.maxRelError, rel);
    ++report.checked;
  }
  return report;
}

}  // namespace pc
