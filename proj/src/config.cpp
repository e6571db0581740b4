#include "pc/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace pc {
namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<double> parse_double_list(const std::vector<std::string>& items) {
  std::vector<double> out;
  out.reserve(items.size());
  for (const std::string& item : items) out.push_back(std::stod(item));
  return out;
}

}  // namespace

KeyValueConfig KeyValueConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path.string());
  KeyValueConfig cfg;
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string trimmed = trim(line);
    if (trimmed.empty()) continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: " + path.string() + ":" + std::to_string(lineNo) +
                                  ": expected 'key = value', got: " + trimmed);
    }
    const std::string key = trim(trimmed.substr(0, eq));
    if (key.empty()) {
      throw std::invalid_argument("config: " + path.string() + ":" + std::to_string(lineNo) +
                                  ": empty key");
    }
    cfg.values_[key] = trim(trimmed.substr(eq + 1));
  }
  return cfg;
}

void KeyValueConfig::apply_overrides(const std::vector<std::string>& overrides) {
  for (const std::string& raw : overrides) {
    std::string item = raw;
    while (!item.empty() && item.front() == '-') item.erase(item.begin());
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0)
      throw std::invalid_argument("override must look like --key=value, got: " + raw);
    values_[trim(item.substr(0, eq))] = trim(item.substr(eq + 1));
  }
}

bool KeyValueConfig::has(const std::string& key) const { return values_.count(key) > 0; }

std::string KeyValueConfig::get(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

long KeyValueConfig::get_long(const std::string& key, long fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return std::stol(it->second);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: key '" + key + "' is not an integer: " + it->second);
  }
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: key '" + key + "' is not a number: " + it->second);
  }
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::string v = it->second;
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw std::invalid_argument("config: key '" + key + "' is not a boolean: " + it->second);
}

std::vector<std::string> KeyValueConfig::get_list(const std::string& key) const {
  std::vector<std::string> out;
  const auto it = values_.find(key);
  if (it == values_.end()) return out;
  std::istringstream in(it->second);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

ExperimentConfig ExperimentConfig::from_kv(const KeyValueConfig& kv) {
  ExperimentConfig cfg;
  cfg.id = kv.get("id", "dataset");
  for (const std::string& f : kv.get_list("train_files")) cfg.trainFiles.emplace_back(f);
  for (const std::string& f : kv.get_list("test_files")) cfg.testFiles.emplace_back(f);

  const std::string format = kv.get("format", "cifar10");
  if (format == "cifar10")
    cfg.format = CifarFormat::Cifar10;
  else if (format == "cifar100")
    cfg.format = CifarFormat::Cifar100;
  else if (format == "cifar100_coarse")
    cfg.format = CifarFormat::Cifar100Coarse;
  else
    throw std::invalid_argument("config: unknown format: " + format);

  cfg.trainLimit = static_cast<std::size_t>(kv.get_long("train_limit", 0));
  cfg.testLimit = static_cast<std::size_t>(kv.get_long("test_limit", 0));
  cfg.trainSubset = static_cast<std::size_t>(kv.get_long("train_subset", 0));
  cfg.testSubset = static_cast<std::size_t>(kv.get_long("test_subset", 0));

  cfg.dictionaryPath = kv.get("dictionary", "");
  cfg.codesTrainPath = kv.get("codes_train", "");
  cfg.codesTestPath = kv.get("codes_test", "");
  cfg.patchSide = static_cast<int>(kv.get_long("patch_side", 6));
  cfg.K = static_cast<int>(kv.get_long("k", 16));
  cfg.patchSample = static_cast<std::size_t>(kv.get_long("patch_sample", 400000));
  cfg.zcaEpsilon = kv.get_double("zca_epsilon", 0.1);
  cfg.kmeansIters = static_cast<int>(kv.get_long("kmeans_iters", 30));

  cfg.units = static_cast<int>(kv.get_long("units", 4));
  const std::string init = kv.get("init", "spm_quadrants");
  if (init == "spm_quadrants")
    cfg.init.kind = InitKind::SpmQuadrants;
  else if (init == "spm_whole")
    cfg.init.kind = InitKind::SpmWhole;
  else if (init == "random_gaussian")
    cfg.init.kind = InitKind::RandomGaussian;
  else if (init == "constant")
    cfg.init.kind = InitKind::Constant;
  else
    throw std::invalid_argument("config: unknown init: " + init);
  cfg.init.mean = kv.get_double("init_mean", 0.5);
  cfg.init.stddev = kv.get_double("init_stddev", 0.1);
  cfg.init.value = kv.get_double("init_value", 1.0);

  const std::string opt = kv.get("optimizer", "lbfgs");
  if (opt == "lbfgs")
    cfg.optimizer = Optimizer::Lbfgs;
  else if (opt == "projected_gd")
    cfg.optimizer = Optimizer::ProjectedGD;
  else
    throw std::invalid_argument("config: unknown optimizer: " + opt);

  cfg.hyper.alpha1 = kv.get_double("alpha1", 1e-4);
  cfg.hyper.alpha2 = kv.get_double("alpha2", 0.0);
  cfg.hyper.alpha3 = kv.get_double("alpha3", 1e-1);
  cfg.hyper.gamma = kv.get_double("gamma", 1.0);
  cfg.hyper.maxIters = static_cast<int>(kv.get_long("max_iters", 500));
  cfg.hyper.prepoolS = static_cast<int>(kv.get_long("prepool_s", 3));
  cfg.hyper.batchWidthD = static_cast<int>(kv.get_long("batch_d", 0));
  cfg.hyper.tolGrad = kv.get_double("tol_grad", 1e-9);
  cfg.hyper.tolObj = kv.get_double("tol_obj", 0.0);
  cfg.hyper.threads = static_cast<int>(kv.get_long("threads", 0));

  const std::string classifier = kv.get("classifier", "softmax");
  if (classifier == "softmax")
    cfg.classifier = ClassifierKind::Softmax;
  else if (classifier == "linear_svm")
    cfg.classifier = ClassifierKind::LinearSvm;
  else
    throw std::invalid_argument("config: unknown classifier: " + classifier);

  cfg.seed = static_cast<std::uint64_t>(kv.get_long("seed", 1));
  cfg.methods = kv.get_list("methods");
  cfg.ablation = kv.get_bool("ablation", false);
  cfg.workers = static_cast<int>(kv.get_long("workers", 4));
  cfg.outDir = kv.get("out_dir", "out");

  cfg.cvFolds = static_cast<int>(kv.get_long("cv_folds", 0));
  cfg.alpha1Grid = parse_double_list(kv.get_list("alpha1_grid"));
  cfg.alpha2Grid = parse_double_list(kv.get_list("alpha2_grid"));
  cfg.alpha3Grid = parse_double_list(kv.get_list("alpha3_grid"));

  if (cfg.K < 1) throw std::invalid_argument("config: k must be >= 1");
  if (cfg.units < 1) throw std::invalid_argument("config: units must be >= 1");
  return cfg;
}

}  // namespace pc
