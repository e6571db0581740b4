#pragma once

#include <cstdint>
#include <vector>

#include "pc/common.hpp"

namespace pc {

/// K centroids in (whitened) patch space, one per row.
struct Dictionary {
  Matrix centroids;  // K x dim

  int size() const { return static_cast<int>(centroids.rows()); }
  int dim() const { return static_cast<int>(centroids.cols()); }
};

/// Lloyd's algorithm with seeded uniform initialization from the data rows.
/// Empty clusters are reseeded to a random data row. Stops early once
/// assignments are stable. Requires #rows >= K and iterations >= 1.
Dictionary kmeans_fit(const Matrix& patches, int K, int iterations, std::uint64_t seed,
                      std::vector<double>* distortionTrace = nullptr);

}  // namespace pc
