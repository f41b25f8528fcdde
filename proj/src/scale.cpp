#include "extrans/scale.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "extrans/error.hpp"

namespace extrans {

namespace {

struct Tap {
  int lo;
  int hi;
  double weight;  // weight of `hi`
};

Tap source_tap(int i, int in_size, int out_size) {
  const double scale = static_cast<double>(in_size) / static_cast<double>(out_size);
  double src = (static_cast<double>(i) + 0.5) * scale - 0.5;
  src = std::clamp(src, 0.0, static_cast<double>(in_size - 1));
  const int lo = static_cast<int>(std::floor(src));
  const int hi = std::min(lo + 1, in_size - 1);
  return {lo, hi, src - static_cast<double>(lo)};
}

std::uint8_t blend(double p00, double p01, double p10, double p11, double wx, double wy) {
  const double top = (1.0 - wx) * p00 + wx * p01;
  const double bottom = (1.0 - wx) * p10 + wx * p11;
  const double v = (1.0 - wy) * top + wy * bottom;
  // std::lround rounds half away from zero.
  return static_cast<std::uint8_t>(std::clamp<long>(std::lround(v), 0, 255));
}

void check_output_size(int out_width, int out_height) {
  if (out_width < 1 || out_height < 1) {
    throw DimensionError("scale target must be at least 1x1, got " + std::to_string(out_width) +
                         "x" + std::to_string(out_height));
  }
}

}  // namespace

Image scale_linear(const Image& image, int out_width, int out_height) {
  check_output_size(out_width, out_height);
  const int channels = image.channels();
  std::vector<Tap> xtaps(static_cast<std::size_t>(out_width));
  for (int x = 0; x < out_width; ++x) xtaps[static_cast<std::size_t>(x)] = source_tap(x, image.width(), out_width);

  Image out(out_width, out_height, channels);
  const auto src = image.data();
  auto dst = out.data();

#pragma omp parallel for schedule(static)
  for (int y = 0; y < out_height; ++y) {
    const Tap ty = source_tap(y, image.height(), out_height);
    for (int x = 0; x < out_width; ++x) {
      const Tap& tx = xtaps[static_cast<std::size_t>(x)];
      const std::size_t o00 = image.offset(tx.lo, ty.lo);
      const std::size_t o01 = image.offset(tx.hi, ty.lo);
      const std::size_t o10 = image.offset(tx.lo, ty.hi);
      const std::size_t o11 = image.offset(tx.hi, ty.hi);
      const std::size_t o = out.offset(x, y);
      for (int c = 0; c < channels; ++c) {
        dst[o + static_cast<std::size_t>(c)] =
            blend(src[o00 + c], src[o01 + c], src[o10 + c], src[o11 + c], tx.weight, ty.weight);
      }
    }
  }
  return out;
}

Image scale_linear_reference(const Image& image, int out_width, int out_height) {
  check_output_size(out_width, out_height);
  Image out(out_width, out_height, image.channels());
  for (int y = 0; y < out_height; ++y) {
    for (int x = 0; x < out_width; ++x) {
      const Tap tx = source_tap(x, image.width(), out_width);
      const Tap ty = source_tap(y, image.height(), out_height);
      for (int c = 0; c < image.channels(); ++c) {
        out.at(x, y, c) = blend(image.at(tx.lo, ty.lo, c), image.at(tx.hi, ty.lo, c),
                                image.at(tx.lo, ty.hi, c), image.at(tx.hi, ty.hi, c),
                                tx.weight, ty.weight);
      }
    }
  }
  return out;
}

}  // namespace extrans
