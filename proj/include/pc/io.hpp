#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pc/batching.hpp"
#include "pc/encode.hpp"
#include "pc/kmeans.hpp"
#include "pc/objective.hpp"
#include "pc/optimize.hpp"
#include "pc/whiten.hpp"

namespace pc {

// Binary formats (all integers little-endian u32, all reals IEEE-754 f64):
//   PCDICT01: magic, K, dim, centroids row-major, mean, matrix row-major, epsilon
//   PCPOOL01: magic, L, gridH, gridW, K, tensor (unit-major, then position
//             row-major, then coordinate)
//   PCMODL01: magic, pooling block (as PCPOOL01 without magic), classifier
//             block (C, featureLength, includeBias u8, theta row-major,
//             bias when includeBias)
//   PCCODE01: magic, count, gridH, gridW, K, classCount, then per item a u32
//             label and the f64 code matrix row-major

struct DictionaryFile {
  Dictionary dict;
  WhitenTransform whiten;
};

void save_dictionary(const std::filesystem::path& path, const Dictionary& dict,
                     const WhitenTransform& wt);
DictionaryFile load_dictionary(const std::filesystem::path& path);

void save_pooling(const std::filesystem::path& path, const PoolingWeights& weights);
PoolingWeights load_pooling(const std::filesystem::path& path);

void save_model(const std::filesystem::path& path, const ModelParams& model);
ModelParams load_model(const std::filesystem::path& path);

void save_codes(const std::filesystem::path& path, const LabeledDataset& data);
LabeledDataset load_codes(const std::filesystem::path& path);

/// Binary PGM (P5) of one weight map; weight v maps to round(255*v).
void write_pgm(const std::filesystem::path& path, int gridH, int gridW, const Vector& values);

/// Training trace as CSV: iteration, objective, data loss, penalty terms,
/// clamp count.
void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRow>& trace);

/// Plain-text batch manifest, one line per batch: "<index>: c0 c1 ...".
void save_plan(const std::filesystem::path& path, const BatchPlan& plan);
/// Reads a manifest back into coordinate assignments.
std::vector<std::vector<int>> load_plan(const std::filesystem::path& path);

}  // namespace pc
