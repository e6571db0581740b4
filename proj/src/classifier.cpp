#include "pc/classifier.hpp"

#include <cmath>

namespace pc {

ClassifierParams make_classifier(int classCount, int featureLength, bool includeBias) {
  if (classCount < 2) throw std::invalid_argument("make_classifier: need at least 2 classes");
  ClassifierParams c;
  c.theta = Matrix::Zero(classCount, featureLength);
  c.includeBias = includeBias;
  if (includeBias) c.bias = Vector::Zero(classCount);
  return c;
}

Vector class_logits(const ClassifierParams& classifier, const Vector& features) {
  if (features.size() != classifier.theta.cols())
    throw std::invalid_argument("class_logits: feature length mismatch");
  Vector z = classifier.theta * features;
  if (classifier.includeBias) z += classifier.bias;
  return z;
}

Vector softmax_probs(const ClassifierParams& classifier, const Vector& features) {
  Vector z = class_logits(classifier, features);
  const double zmax = z.maxCoeff();
  Vector p = (z.array() - zmax).exp();
  return p / p.sum();
}

int predict_class(const ClassifierParams& classifier, const Vector& features) {
  Eigen::Index best;
  class_logits(classifier, features).maxCoeff(&best);
  return static_cast<int>(best);
}

double classification_accuracy(const ClassifierParams& classifier, const Matrix& features,
                               const std::vector<int>& labels) {
  if (static_cast<std::size_t>(features.rows()) != labels.size())
    throw std::invalid_argument("classification_accuracy: row/label count mismatch");
  if (labels.empty()) throw std::invalid_argument("classification_accuracy: empty data");
  long correct = 0;
  for (Eigen::Index i = 0; i < features.rows(); ++i)
    if (predict_class(classifier, features.row(i)) == labels[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

}  // namespace pc
