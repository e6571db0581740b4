#include "pc/cifar.hpp"

#include <fstream>

namespace pc {
namespace {

constexpr std::size_t kPixelBytes = 3072;  // 32*32*3

struct FormatInfo {
  std::size_t recordLength;
  std::size_t labelOffset;  // which label byte to use
  int classCount;
};

FormatInfo info_for(CifarFormat format) {
  switch (format) {
    case CifarFormat::Cifar10:
      return {1 + kPixelBytes, 0, 10};
    case CifarFormat::Cifar100:
      return {2 + kPixelBytes, 1, 100};  // coarse byte, then fine byte
    case CifarFormat::Cifar100Coarse:
      return {2 + kPixelBytes, 0, 20};
  }
  throw std::invalid_argument("load_cifar: unknown format");
}

}  // namespace

CifarData load_cifar(const std::filesystem::path& path, CifarFormat format, std::size_t limit) {
  const FormatInfo fmt = info_for(format);

  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("load_cifar: cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto fileSize = static_cast<std::size_t>(in.tellg());
  in.seekg(0);

  if (fileSize % fmt.recordLength != 0) {
    const std::size_t offset = fileSize - fileSize % fmt.recordLength;
    throw FormatError("load_cifar: " + path.string() + " is truncated: size " +
                      std::to_string(fileSize) + " is not a multiple of record length " +
                      std::to_string(fmt.recordLength) + " (partial record at byte offset " +
                      std::to_string(offset) + ")");
  }

  std::size_t count = fileSize / fmt.recordLength;
  if (limit > 0) count = std::min(count, limit);

  CifarData data;
  data.classCount = fmt.classCount;
  data.images.reserve(count);
  data.labels.reserve(count);

  std::vector<unsigned char> record(fmt.recordLength);
  const std::size_t headerBytes = fmt.recordLength - kPixelBytes;
  for (std::size_t i = 0; i < count; ++i) {
    in.read(reinterpret_cast<char*>(record.data()), static_cast<std::streamsize>(record.size()));
    if (!in) throw FormatError("load_cifar: read failed at record " + std::to_string(i));

    const int label = record[fmt.labelOffset];
    if (label >= fmt.classCount) {
      throw FormatError("load_cifar: label " + std::to_string(label) + " out of range at record " +
                        std::to_string(i) + " (byte offset " +
                        std::to_string(i * fmt.recordLength + fmt.labelOffset) + ")");
    }
    Image img;
    img.width = 32;
    img.height = 32;
    img.channels = 3;
    img.pixels.resize(kPixelBytes);
    for (std::size_t p = 0; p < kPixelBytes; ++p)
      img.pixels[p] = record[headerBytes + p] / 255.0;
    data.images.push_back(std::move(img));
    data.labels.push_back(label);
  }
  return data;
}

CifarData load_cifar_files(const std::vector<std::filesystem::path>& paths, CifarFormat format,
                           std::size_t limit) {
  CifarData all;
  all.classCount = info_for(format).classCount;
  for (const auto& path : paths) {
    if (limit > 0 && all.images.size() >= limit) break;
    const std::size_t remaining = limit > 0 ? limit - all.images.size() : 0;
    CifarData part = load_cifar(path, format, remaining);
    for (auto& img : part.images) all.images.push_back(std::move(img));
    all.labels.insert(all.labels.end(), part.labels.begin(), part.labels.end());
  }
  return all;
}

}  // namespace pc
