#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "pc/batching.hpp"
#include "pc/cifar.hpp"
#include "pc/objective.hpp"

namespace pc {

/// Flat "key = value" configuration ('#' starts a comment). Later assignments
/// and command-line overrides win.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig from_file(const std::filesystem::path& path);
  /// Applies "key=value" override strings (leading dashes stripped).
  void apply_overrides(const std::vector<std::string>& overrides);

  bool has(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  long get_long(const std::string& key, long fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::string> get_list(const std::string& key) const;  // comma-separated

  void set(const std::string& key, const std::string& value);
  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Everything one experiment needs, resolved from a KeyValueConfig.
struct ExperimentConfig {
  std::string id = "dataset";  // used in transfer reports
  // data
  std::vector<std::filesystem::path> trainFiles;
  std::vector<std::filesystem::path> testFiles;
  CifarFormat format = CifarFormat::Cifar10;
  std::size_t trainLimit = 0;
  std::size_t testLimit = 0;
  std::size_t trainSubset = 0;  // 0 = keep everything loaded
  std::size_t testSubset = 0;
  // pipeline
  std::filesystem::path dictionaryPath;
  std::filesystem::path codesTrainPath;  // optional PCCODE01 caches
  std::filesystem::path codesTestPath;
  int patchSide = 6;
  int K = 16;
  std::size_t patchSample = 400000;
  double zcaEpsilon = 0.1;
  int kmeansIters = 30;
  // model + training
  int units = 4;
  InitScheme init;
  Optimizer optimizer = Optimizer::Lbfgs;
  Hyperparams hyper;
  ClassifierKind classifier = ClassifierKind::Softmax;
  std::uint64_t seed = 1;
  // experiment orchestration
  std::vector<std::string> methods;  // subset of the method names in runner.hpp
  bool ablation = false;
  int workers = 4;
  std::filesystem::path outDir = "out";
  // cross-validation (0 folds disables)
  int cvFolds = 0;
  std::vector<double> alpha1Grid;
  std::vector<double> alpha2Grid;
  std::vector<double> alpha3Grid;

  static ExperimentConfig from_kv(const KeyValueConfig& kv);
};

}  // namespace pc
