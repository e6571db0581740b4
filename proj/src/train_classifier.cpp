#include "train_classifier.hpp"

#include <cmath>

#include "minimize.hpp"

namespace pc::detail {
namespace {

constexpr double kTolGrad = 1e-8;

}  // namespace

ClassifierParams train_softmax_classifier(const Matrix& features, const std::vector<int>& labels,
                                          int classCount, const Hyperparams& hyper) {
  const Eigen::Index n = features.rows();
  const Eigen::Index F = features.cols();
  const Eigen::Index C = classCount;
  const double invN = 1.0 / static_cast<double>(n);

  // x = [theta column-major (C x F), bias (C)]
  EvalFn eval = [&](const Vector& x, Vector* grad, ObjectiveTerms* terms) {
    Eigen::Map<const Matrix> theta(x.data(), C, F);
    Eigen::Map<const Vector> bias(x.data() + C * F, C);

    Matrix logits = features * theta.transpose();
    logits.rowwise() += bias.transpose();
    Vector rowMax = logits.rowwise().maxCoeff();
    Matrix expz = (logits.colwise() - rowMax).array().exp();
    Vector rowSum = expz.rowwise().sum();

    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      loss -= logits(i, labels[i]) - rowMax[i] - std::log(rowSum[i]);
    loss *= invN;
    const double reg = 0.5 * hyper.alpha1 * theta.squaredNorm();

    if (grad) {
      Matrix dz = expz.array().colwise() / rowSum.array();
      for (Eigen::Index i = 0; i < n; ++i) dz(i, labels[i]) -= 1.0;
      dz *= invN;
      grad->resize(x.size());
      Eigen::Map<Matrix>(grad->data(), C, F) =
          dz.transpose() * features + hyper.alpha1 * theta;
      Eigen::Map<Vector>(grad->data() + C * F, C) = dz.colwise().sum();
    }
    if (terms) {
      terms->dataLoss = loss;
      terms->thetaL2 = theta.squaredNorm();
      terms->total = loss + reg;
    }
    return loss + reg;
  };

  Vector x0 = Vector::Zero(C * F + C);
  MinimizeResult out =
      minimize_lbfgs(eval, std::move(x0), 0, hyper.maxIters, kTolGrad, hyper.tolObj, {});

  ClassifierParams params = make_classifier(classCount, static_cast<int>(F));
  params.theta = Eigen::Map<const Matrix>(out.x.data(), C, F);
  params.bias = out.x.segment(C * F, C);
  return params;
}

ClassifierParams train_svm_classifier(const Matrix& features, const std::vector<int>& labels,
                                      int classCount, const Hyperparams& hyper) {
  const Eigen::Index n = features.rows();
  const Eigen::Index F = features.cols();
  const double invN = 1.0 / static_cast<double>(n);

  ClassifierParams params = make_classifier(classCount, static_cast<int>(F));
  for (int c = 0; c < classCount; ++c) {
    Vector target(n);
    for (Eigen::Index i = 0; i < n; ++i) target[i] = labels[i] == c ? 1.0 : -1.0;

    // x = [w (F), b]
    EvalFn eval = [&](const Vector& x, Vector* grad, ObjectiveTerms* terms) {
      Eigen::Map<const Vector> w(x.data(), F);
      const double b = x[F];
      Vector margin = 1.0 - target.array() * (features * w).array() - target.array() * b;
      Vector active = margin.cwiseMax(0.0);
      const double loss = active.squaredNorm() * invN;
      const double reg = 0.5 * hyper.alpha1 * w.squaredNorm();
      if (grad) {
        Vector coeff = -2.0 * invN * active.array() * target.array();
        grad->resize(x.size());
        Eigen::Map<Vector>(grad->data(), F) = features.transpose() * coeff + hyper.alpha1 * w;
        (*grad)[F] = coeff.sum();
      }
      if (terms) {
        terms->dataLoss = loss;
        terms->total = loss + reg;
      }
      return loss + reg;
    };

    Vector x0 = Vector::Zero(F + 1);
    MinimizeResult out =
        minimize_lbfgs(eval, std::move(x0), 0, hyper.maxIters, kTolGrad, hyper.tolObj, {});
    params.theta.row(c) = out.x.head(F).transpose();
    params.bias[c] = out.x[F];
  }
  return params;
}

}  // namespace pc::detail
