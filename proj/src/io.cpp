#include "pc/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace pc {
namespace {

void write_bytes(std::ofstream& out, const void* data, std::size_t n) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

void write_magic(std::ofstream& out, const char (&magic)[9]) { write_bytes(out, magic, 8); }

void write_u32(std::ofstream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  write_bytes(out, b, 4);
}

void write_f64(std::ofstream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  write_bytes(out, b, 8);
}

class Reader {
 public:
  Reader(const std::filesystem::path& path, const char (&magic)[9]) : path_(path.string()) {
    in_.open(path, std::ios::binary);
    if (!in_) throw FormatError(path_ + ": cannot open");
    char got[8];
    read_bytes(got, 8);
    if (std::memcmp(got, magic, 8) != 0)
      throw FormatError(path_ + ": bad magic, expected " + std::string(magic, 8));
  }

  std::uint32_t u32() {
    unsigned char b[4];
    read_bytes(b, 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  }

  unsigned char u8() {
    unsigned char b;
    read_bytes(&b, 1);
    return b;
  }

  double f64() {
    unsigned char b[8];
    read_bytes(b, 8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }

  void expect_eof() {
    in_.peek();
    if (!in_.eof()) throw FormatError(path_ + ": trailing bytes after payload");
  }

 private:
  void read_bytes(void* dst, std::size_t n) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (!in_) throw FormatError(path_ + ": truncated file");
  }

  std::ifstream in_;
  std::string path_;
};

void write_matrix_rowmajor(std::ofstream& out, const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) write_f64(out, m(r, c));
}

Matrix read_matrix_rowmajor(Reader& in, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = in.f64();
  return m;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(path.string() + ": cannot open for writing");
  return out;
}

void write_pooling_block(std::ofstream& out, const PoolingWeights& w) {
  write_u32(out, static_cast<std::uint32_t>(w.unitCount()));
  write_u32(out, static_cast<std::uint32_t>(w.gridH));
  write_u32(out, static_cast<std::uint32_t>(w.gridW));
  write_u32(out, static_cast<std::uint32_t>(w.codeDim()));
  for (const Matrix& unit : w.units) write_matrix_rowmajor(out, unit);
}

PoolingWeights read_pooling_block(Reader& in) {
  PoolingWeights w;
  const std::uint32_t L = in.u32();
  w.gridH = static_cast<int>(in.u32());
  w.gridW = static_cast<int>(in.u32());
  const std::uint32_t K = in.u32();
  const Eigen::Index M = static_cast<Eigen::Index>(w.gridH) * w.gridW;
  w.units.reserve(L);
  for (std::uint32_t l = 0; l < L; ++l)
    w.units.push_back(read_matrix_rowmajor(in, M, K));
  return w;
}

}  // namespace

void save_dictionary(const std::filesystem::path& path, const Dictionary& dict,
                     const WhitenTransform& wt) {
  if (dict.dim() != wt.dim())
    throw std::invalid_argument("save_dictionary: dictionary/whitening dimension mismatch");
  std::ofstream out = open_out(path);
  write_magic(out, "PCDICT01");
  write_u32(out, static_cast<std::uint32_t>(dict.size()));
  write_u32(out, static_cast<std::uint32_t>(dict.dim()));
  write_matrix_rowmajor(out, dict.centroids);
  for (Eigen::Index i = 0; i < wt.mean.size(); ++i) write_f64(out, wt.mean[i]);
  write_matrix_rowmajor(out, wt.matrix);
  write_f64(out, wt.epsilon);
}

DictionaryFile load_dictionary(const std::filesystem::path& path) {
  Reader in(path, "PCDICT01");
  const std::uint32_t K = in.u32();
  const std::uint32_t dim = in.u32();
  DictionaryFile file;
  file.dict.centroids = read_matrix_rowmajor(in, K, dim);
  file.whiten.mean.resize(dim);
  for (std::uint32_t i = 0; i < dim; ++i) file.whiten.mean[i] = in.f64();
  file.whiten.matrix = read_matrix_rowmajor(in, dim, dim);
  file.whiten.epsilon = in.f64();
  in.expect_eof();
  return file;
}

void save_pooling(const std::filesystem::path& path, const PoolingWeights& weights) {
  std::ofstream out = open_out(path);
  write_magic(out, "PCPOOL01");
  write_pooling_block(out, weights);
}

PoolingWeights load_pooling(const std::filesystem::path& path) {
  Reader in(path, "PCPOOL01");
  PoolingWeights w = read_pooling_block(in);
  in.expect_eof();
  return w;
}

void save_model(const std::filesystem::path& path, const ModelParams& model) {
  std::ofstream out = open_out(path);
  write_magic(out, "PCMODL01");
  write_pooling_block(out, model.pooling);
  write_u32(out, static_cast<std::uint32_t>(model.classifier.classCount()));
  write_u32(out, static_cast<std::uint32_t>(model.classifier.featureLength()));
  const unsigned char biasFlag = model.classifier.includeBias ? 1 : 0;
  write_bytes(out, &biasFlag, 1);
  write_matrix_rowmajor(out, model.classifier.theta);
  if (model.classifier.includeBias)
    for (Eigen::Index i = 0; i < model.classifier.bias.size(); ++i)
      write_f64(out, model.classifier.bias[i]);
}

ModelParams load_model(const std::filesystem::path& path) {
  Reader in(path, "PCMODL01");
  ModelParams model;
  model.pooling = read_pooling_block(in);
  const std::uint32_t C = in.u32();
  const std::uint32_t F = in.u32();
  const bool includeBias = in.u8() != 0;
  model.classifier.includeBias = includeBias;
  model.classifier.theta = read_matrix_rowmajor(in, C, F);
  if (includeBias) {
    model.classifier.bias.resize(C);
    for (std::uint32_t i = 0; i < C; ++i) model.classifier.bias[i] = in.f64();
  }
  in.expect_eof();
  return model;
}

void save_codes(const std::filesystem::path& path, const LabeledDataset& data) {
  if (data.items.empty()) throw std::invalid_argument("save_codes: empty dataset");
  std::ofstream out = open_out(path);
  write_magic(out, "PCCODE01");
  const CodeGrid& g0 = data.items.front();
  write_u32(out, static_cast<std::uint32_t>(data.items.size()));
  write_u32(out, static_cast<std::uint32_t>(g0.gridH));
  write_u32(out, static_cast<std::uint32_t>(g0.gridW));
  write_u32(out, static_cast<std::uint32_t>(g0.codeDim()));
  write_u32(out, static_cast<std::uint32_t>(data.classCount));
  for (std::size_t i = 0; i < data.items.size(); ++i) {
    write_u32(out, static_cast<std::uint32_t>(data.labels[i]));
    write_matrix_rowmajor(out, data.items[i].codes);
  }
}

LabeledDataset load_codes(const std::filesystem::path& path) {
  Reader in(path, "PCCODE01");
  const std::uint32_t count = in.u32();
  const int gridH = static_cast<int>(in.u32());
  const int gridW = static_cast<int>(in.u32());
  const std::uint32_t K = in.u32();
  LabeledDataset data;
  data.classCount = static_cast<int>(in.u32());
  const Eigen::Index M = static_cast<Eigen::Index>(gridH) * gridW;
  data.items.reserve(count);
  data.labels.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    data.labels.push_back(static_cast<int>(in.u32()));
    CodeGrid grid;
    grid.gridH = gridH;
    grid.gridW = gridW;
    grid.codes = read_matrix_rowmajor(in, M, K);
    data.items.push_back(std::move(grid));
  }
  in.expect_eof();
  return data;
}

void write_pgm(const std::filesystem::path& path, int gridH, int gridW, const Vector& values) {
  if (values.size() != static_cast<Eigen::Index>(gridH) * gridW)
    throw std::invalid_argument("write_pgm: value count does not match grid");
  std::ofstream out = open_out(path);
  out << "P5\n" << gridW << " " << gridH << "\n255\n";
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    const long byte = std::lround(255.0 * std::clamp(values[j], 0.0, 1.0));
    const unsigned char b = static_cast<unsigned char>(byte);
    write_bytes(out, &b, 1);
  }
}

void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRow>& trace) {
  std::ofstream out = open_out(path);
  out << "iteration,objective,data_loss,penalty_theta_l2,penalty_w_l2,penalty_smooth,clamp_count\n";
  out.precision(17);
  for (const TraceRow& row : trace) {
    out << row.iter << ',' << row.objective << ',' << row.dataLoss << ',' << row.thetaL2 << ','
        << row.wL2 << ',' << row.smooth << ',' << row.clamped << '\n';
  }
}

void save_plan(const std::filesystem::path& path, const BatchPlan& plan) {
  std::ofstream out = open_out(path);
  for (int b = 0; b < plan.batchCount(); ++b) {
    out << b << ':';
    for (int c : plan.assignments[b]) out << ' ' << c;
    out << '\n';
  }
}

std::vector<std::vector<int>> load_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path.string() + ": cannot open");
  std::vector<std::vector<int>> assignments;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw FormatError(path.string() + ": malformed line: " + line);
    std::istringstream rest(line.substr(colon + 1));
    std::vector<int> coords;
    int c;
    while (rest >> c) coords.push_back(c);
    if (coords.empty()) throw FormatError(path.string() + ": batch with no coordinates: " + line);
    assignments.push_back(std::move(coords));
  }
  if (assignments.empty()) throw FormatError(path.string() + ": empty manifest");
  return assignments;
}

}  // namespace pc
