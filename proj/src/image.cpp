#include "extrans/image.hpp"

#include <string>

#include "extrans/error.hpp"

namespace extrans {

namespace {

void check_geometry(int width, int height, int channels) {
  if (width < 1 || height < 1) {
    throw DimensionError("image dimensions must be positive, got " +
                         std::to_string(width) + "x" + std::to_string(height));
  }
  if (channels != 1 && channels != 3) {
    throw DimensionError("unsupported channel count " + std::to_string(channels));
  }
}

}  // namespace

Image::Image(int width, int height, int channels)
    : width_(width), height_(height), channels_(channels) {
  check_geometry(width, height, channels);
  data_.assign(pixel_count() * static_cast<std::size_t>(channels), 0);
}

Image::Image(int width, int height, int channels, std::vector<std::uint8_t> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  check_geometry(width, height, channels);
  const std::size_t expected = pixel_count() * static_cast<std::size_t>(channels);
  if (data_.size() != expected) {
    throw DimensionError("image data has " + std::to_string(data_.size()) +
                         " bytes, expected " + std::to_string(expected));
  }
}

}  // namespace extrans
