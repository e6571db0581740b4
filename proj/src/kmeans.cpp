#include "pc/kmeans.hpp"

#include <limits>
#include <numeric>
#include <random>

namespace pc {
namespace {

// Squared Euclidean distances between every data row and every centroid.
Matrix pairwise_sqdist(const Matrix& data, const Matrix& centroids) {
  Vector dataSq = data.rowwise().squaredNorm();
  Vector centSq = centroids.rowwise().squaredNorm();
  Matrix d2 = data * centroids.transpose() * -2.0;
  d2.colwise() += dataSq;
  d2.rowwise() += centSq.transpose();
  return d2.cwiseMax(0.0);
}

}  // namespace

Dictionary kmeans_fit(const Matrix& patches, int K, int iterations, std::uint64_t seed,
                      std::vector<double>* distortionTrace) {
  const Eigen::Index n = patches.rows();
  if (K < 1) throw std::invalid_argument("kmeans_fit: K must be >= 1");
  if (n < K) {
    throw std::invalid_argument("kmeans_fit: need at least K patches, got " +
                                std::to_string(n) + " for K " + std::to_string(K));
  }
  if (iterations < 1) throw std::invalid_argument("kmeans_fit: iterations must be >= 1");

  std::mt19937_64 rng(seed);
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::shuffle(order.begin(), order.end(), rng);

  Dictionary dict;
  dict.centroids.resize(K, patches.cols());
  for (int k = 0; k < K; ++k) dict.centroids.row(k) = patches.row(order[k]);

  std::vector<int> assignment(n, -1);
  if (distortionTrace) distortionTrace->clear();

  for (int iter = 0; iter < iterations; ++iter) {
    Matrix d2 = pairwise_sqdist(patches, dict.centroids);
    bool changed = false;
    double distortion = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best;
      distortion += d2.row(i).minCoeff(&best);
      if (assignment[i] != static_cast<int>(best)) {
        assignment[i] = static_cast<int>(best);
        changed = true;
      }
    }
    if (distortionTrace) distortionTrace->push_back(distortion / static_cast<double>(n));
    if (!changed && iter > 0) break;

    Matrix sums = Matrix::Zero(K, patches.cols());
    std::vector<long> counts(K, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(assignment[i]) += patches.row(i);
      ++counts[assignment[i]];
    }
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    for (int k = 0; k < K; ++k) {
      if (counts[k] > 0)
        dict.centroids.row(k) = sums.row(k) / static_cast<double>(counts[k]);
      else
        dict.centroids.row(k) = patches.row(pick(rng));  // reseed empty cluster
    }
  }
  return dict;
}

}  // namespace pc
