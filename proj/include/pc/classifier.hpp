#pragma once

#include <vector>

#include "pc/common.hpp"

namespace pc {

/// Multinomial logistic (or one-vs-rest SVM) parameters. One row of theta per
/// class; columns match the pooled-feature length. The bias, when enabled, is
/// excluded from L2 penalties.
struct ClassifierParams {
  Matrix theta;  // C x F
  bool includeBias = true;
  Vector bias;   // C, used when includeBias

  int classCount() const { return static_cast<int>(theta.rows()); }
  int featureLength() const { return static_cast<int>(theta.cols()); }
};

/// Zero-initialized classifier.
ClassifierParams make_classifier(int classCount, int featureLength, bool includeBias = true);

/// Class logits theta * a (+ bias).
Vector class_logits(const ClassifierParams& classifier, const Vector& features);

/// Softmax probabilities with max-subtraction; entries positive, sum to 1.
Vector softmax_probs(const ClassifierParams& classifier, const Vector& features);

/// Argmax class of the logits.
int predict_class(const ClassifierParams& classifier, const Vector& features);

/// Fraction of rows of `features` classified as `labels`.
double classification_accuracy(const ClassifierParams& classifier, const Matrix& features,
                               const std::vector<int>& labels);

}  // namespace pc
