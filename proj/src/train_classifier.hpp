#pragma once

// Internal feature-space classifier trainers used by retrain_classifier.

#include <vector>

#include "pc/classifier.hpp"
#include "pc/objective.hpp"

namespace pc::detail {

/// Multinomial logistic regression on fixed features: mean cross-entropy plus
/// alpha1/2*||Theta||^2 (bias unpenalized), minimized with L-BFGS from zero.
ClassifierParams train_softmax_classifier(const Matrix& features, const std::vector<int>& labels,
                                          int classCount, const Hyperparams& hyper);

/// One-vs-rest squared-hinge linear SVM: per class, mean squared hinge loss
/// plus alpha1/2*||w||^2 (bias unpenalized), minimized with L-BFGS from zero.
ClassifierParams train_svm_classifier(const Matrix& features, const std::vector<int>& labels,
                                      int classCount, const Hyperparams& hyper);

}  // namespace pc::detail
