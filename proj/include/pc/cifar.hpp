#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "pc/image.hpp"

namespace pc {

/// CIFAR binary record layout: CIFAR-10 is 1 label byte + 3072 pixel bytes
/// (channel-planar R,G,B, row-major within a channel); CIFAR-100 prepends a
/// coarse label byte before the fine label.
enum class CifarFormat { Cifar10, Cifar100, Cifar100Coarse };

struct CifarData {
  std::vector<Image> images;  // pixels scaled to [0,1]
  std::vector<int> labels;
  int classCount = 0;
};

/// Reads `limit` records (0 = all) from one CIFAR binary file. Throws
/// FormatError if the file size is not a multiple of the record length (the
/// message carries the offending byte offset) or a label is out of range.
CifarData load_cifar(const std::filesystem::path& path, CifarFormat format,
                     std::size_t limit = 0);

/// Concatenates records from several files, honoring `limit` across the total.
CifarData load_cifar_files(const std::vector<std::filesystem::path>& paths, CifarFormat format,
                           std::size_t limit = 0);

}  // namespace pc
