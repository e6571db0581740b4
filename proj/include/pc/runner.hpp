#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pc/config.hpp"
#include "pc/io.hpp"

namespace pc {

/// One comparison row, mirroring the usual reporting layout.
struct ResultRow {
  std::string method;
  int dictionarySize = 0;
  long featureCount = 0;
  double accuracyPercent = 0.0;
  bool failed = false;
  std::string note;
};

struct ResultsTable {
  std::vector<ResultRow> rows;

  std::string to_csv() const;
  std::string to_text() const;  // aligned columns
};

inline const std::vector<std::string> kRunMethods = {
    "spm_fixed", "random_pooling", "learned_full", "learned_batches", "learned_redundant"};

/// Fits the whitening transform and dictionary on a seeded patch sample and
/// writes the PCDICT01 file. Returns the output path.
std::filesystem::path run_train_dictionary(const ExperimentConfig& cfg,
                                           const std::filesystem::path& output);

/// Loads (or reads from cache) the encoded train/test datasets for a config.
struct EncodedData {
  LabeledDataset train;
  LabeledDataset test;
};
EncodedData encode_datasets(const ExperimentConfig& cfg);

/// Encodes one split (train or test) through dictionary + whitening + triangle
/// coding + pre-pooling.
LabeledDataset encode_split(const ExperimentConfig& cfg, bool testSplit);

/// Runs the requested methods (and the regularizer ablation when enabled) on
/// one config; writes models, traces, and the results table under cfg.outDir.
ResultsTable run_experiment(const ExperimentConfig& cfg);

/// Self-contained transfer: loads the source pooling (full model file, or a
/// manifest plus per-batch model files), encodes the target config's data,
/// retrains the classifier and evaluates.
TransferReport run_transfer(const std::filesystem::path& sourceModel,
                            const std::optional<std::filesystem::path>& sourceManifest,
                            const std::optional<std::filesystem::path>& sourceModelsDir,
                            const ExperimentConfig& targetCfg, ClassifierKind kind);

/// Seeded uniform subsample without replacement; keeps order of a shuffled
/// index draw. count == 0 or count >= size keeps the data unchanged.
void subsample_cifar(CifarData& data, std::size_t count, std::uint64_t seed);

}  // namespace pc
