#include "extrans/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "extrans/prng.hpp"

namespace extrans {

Image synthetic_scene(int side, std::uint64_t seed) {
  Prng rng(seed);
  const double cx = side * (0.3 + 0.4 * rng.uniform01());
  const double cy = side * (0.3 + 0.4 * rng.uniform01());
  const double r = side * (0.15 + 0.15 * rng.uniform01());
  const int hue = static_cast<int>(rng.bounded(3));
  Image img(side, side, 3);
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      double base[3] = {40.0 + 150.0 * x / side, 60.0 + 120.0 * y / side,
                        200.0 - 100.0 * (x + y) / (2.0 * side)};
      const double d = std::hypot(x - cx, y - cy);
      if (d < r) base[hue] = 230.0 - 40.0 * d / r;
      if (std::abs(y - side / 4) < side / 16) base[(hue + 1) % 3] = 20.0;
      for (int c = 0; c < 3; ++c) {
        img.at(x, y, c) = static_cast<std::uint8_t>(std::lround(std::clamp(base[c], 0.0, 255.0)));
      }
    }
  }
  return img;
}

Dataset synthetic_dataset(std::size_t count, std::uint64_t seed) {
  Dataset ds;
  ds.split = Split::kTest;
  ds.records.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto fine = static_cast<std::uint8_t>(i % kFineClasses);
    ds.records.push_back({synthetic_scene(kCifarSide, seed + i), fine,
                          static_cast<std::uint8_t>(fine / 5)});
  }
  return ds;
}

}  // namespace extrans
