#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "extrans/image.hpp"

namespace extrans {

inline constexpr int kCifarSide = 32;
inline constexpr std::size_t kCifarPixelBytes = 3 * 32 * 32;
inline constexpr std::size_t kCifar100RecordBytes = 2 + kCifarPixelBytes;
inline constexpr int kFineClasses = 100;
inline constexpr int kCoarseClasses = 20;

enum class Split { kTrain, kTest };

const char* split_name(Split split) noexcept;

struct LabeledImage {
  Image image;
  std::uint8_t fine_label = 0;
  std::uint8_t coarse_label = 0;
};

struct Dataset {
  Split split = Split::kTest;
  std::vector<LabeledImage> records;
  std::vector<std::string> fine_names;
  std::vector<std::string> coarse_names;

  std::size_t size() const noexcept { return records.size(); }

  /// True when the record count matches the published split size
  /// (50,000 train / 10,000 test).
  bool canonical() const noexcept;

  /// Human-readable fine label, falling back to "class_<id>" when no name
  /// table was loaded.
  std::string fine_name(int label) const;
};

/// Parses the CIFAR-100 binary layout: per record one coarse byte, one fine
/// byte, then 1024 R, 1024 G, 1024 B bytes (each a row-major 32x32 plane).
/// Throws FormatError naming the offending record index.
Dataset load_cifar100_binary(std::span<const std::uint8_t> bytes, Split split);

Dataset load_cifar100_file(const std::filesystem::path& path, Split split);

/// Inverse of load_cifar100_binary.
std::vector<std::uint8_t> serialize_cifar100(const Dataset& dataset);

/// One name per line, blank lines skipped (fine_label_names.txt format).
std::vector<std::string> load_label_names(const std::filesystem::path& path);

/// Converts 3072 planar CIFAR pixel bytes to a 32x32x3 interleaved image.
Image planar_to_interleaved(std::span<const std::uint8_t> planar);
std::array<std::uint8_t, kCifarPixelBytes> interleaved_to_planar(const Image& image);

}  // namespace extrans
