#include "extrans/cifar.hpp"

#include <fstream>
#include <iterator>
#include <string>

#include "extrans/error.hpp"

namespace extrans {

namespace {

constexpr std::size_t kPlane = 32 * 32;

std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

const char* split_name(Split split) noexcept {
  return split == Split::kTrain ? "train" : "test";
}

bool Dataset::canonical() const noexcept {
  return records.size() == (split == Split::kTrain ? 50000u : 10000u);
}

std::string Dataset::fine_name(int label) const {
  if (label >= 0 && static_cast<std::size_t>(label) < fine_names.size()) {
    return fine_names[static_cast<std::size_t>(label)];
  }
  return "class_" + std::to_string(label);
}

Image planar_to_interleaved(std::span<const std::uint8_t> planar) {
  if (planar.size() != kCifarPixelBytes) {
    throw FormatError("planar CIFAR image must be 3072 bytes");
  }
  std::vector<std::uint8_t> data(kCifarPixelBytes);
  for (std::size_t i = 0; i < kPlane; ++i) {
    data[3 * i + 0] = planar[i];
    data[3 * i + 1] = planar[kPlane + i];
    data[3 * i + 2] = planar[2 * kPlane + i];
  }
  return Image(kCifarSide, kCifarSide, 3, std::move(data));
}

std::array<std::uint8_t, kCifarPixelBytes> interleaved_to_planar(const Image& image) {
  if (image.width() != kCifarSide || image.height() != kCifarSide || image.channels() != 3) {
    throw DimensionError("CIFAR images are 32x32x3");
  }
  std::array<std::uint8_t, kCifarPixelBytes> planar{};
  const auto data = image.data();
  for (std::size_t i = 0; i < kPlane; ++i) {
    planar[i] = data[3 * i + 0];
    planar[kPlane + i] = data[3 * i + 1];
    planar[2 * kPlane + i] = data[3 * i + 2];
  }
  return planar;
}

Dataset load_cifar100_binary(std::span<const std::uint8_t> bytes, Split split) {
  if (bytes.size() % kCifar100RecordBytes != 0) {
    throw FormatError("truncated CIFAR-100 stream: " + std::to_string(bytes.size()) +
                      " bytes is not a multiple of 3074 (record " +
                      std::to_string(bytes.size() / kCifar100RecordBytes) + " incomplete)");
  }
  Dataset dataset;
  dataset.split = split;
  const std::size_t count = bytes.size() / kCifar100RecordBytes;
  dataset.records.reserve(count);
  for (std::size_t r = 0; r < count; ++r) {
    const auto record = bytes.subspan(r * kCifar100RecordBytes, kCifar100RecordBytes);
    const std::uint8_t coarse = record[0];
    const std::uint8_t fine = record[1];
    if (coarse >= kCoarseClasses) {
      throw FormatError("record " + std::to_string(r) + ": coarse label " +
                        std::to_string(coarse) + " out of range");
    }
    if (fine >= kFineClasses) {
      throw FormatError("record " + std::to_string(r) + ": fine label " +
                        std::to_string(fine) + " out of range");
    }
    dataset.records.push_back({planar_to_interleaved(record.subspan(2)), fine, coarse});
  }
  return dataset;
}

Dataset load_cifar100_file(const std::filesystem::path& path, Split split) {
  const auto bytes = read_all(path);
  Dataset dataset = load_cifar100_binary(bytes, split);
  const auto dir = path.parent_path();
  if (std::filesystem::exists(dir / "fine_label_names.txt")) {
    dataset.fine_names = load_label_names(dir / "fine_label_names.txt");
  }
  if (std::filesystem::exists(dir / "coarse_label_names.txt")) {
    dataset.coarse_names = load_label_names(dir / "coarse_label_names.txt");
  }
  return dataset;
}

std::vector<std::uint8_t> serialize_cifar100(const Dataset& dataset) {
  std::vector<std::uint8_t> out;
  out.reserve(dataset.records.size() * kCifar100RecordBytes);
  for (const auto& rec : dataset.records) {
    out.push_back(rec.coarse_label);
    out.push_back(rec.fine_label);
    const auto planar = interleaved_to_planar(rec.image);
    out.insert(out.end(), planar.begin(), planar.end());
  }
  return out;
}

std::vector<std::string> load_label_names(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) names.push_back(line);
  }
  return names;
}

}  // namespace extrans
