#include "extrans/transforms.hpp"

#include <algorithm>
#include <sstream>
#include <string>
#include <utility>

#include "extrans/error.hpp"

namespace extrans {

namespace {

void check_blocks(int width, int height, int block) {
  if (block < 1 || width % block != 0 || height % block != 0) {
    throw DimensionError("block size " + std::to_string(block) +
                         " does not divide image dimensions " + std::to_string(width) + "x" +
                         std::to_string(height));
  }
}

void check_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw SpecError("shuffle probability must lie in [0, 1], got " + std::to_string(p));
  }
}

SourceMap identity_map(std::size_t n) {
  SourceMap map(n);
  for (std::size_t i = 0; i < n; ++i) map[i] = static_cast<std::uint32_t>(i);
  return map;
}

}  // namespace

std::string_view kind_name(TransformKind kind) noexcept {
  switch (kind) {
    case TransformKind::kBaseline: return "baseline";
    case TransformKind::kGridShuffle: return "grid_shuffle";
    case TransformKind::kRandomizedShuffle: return "randomized_shuffle";
    case TransformKind::kWithinGridShuffle: return "within_grid_shuffle";
    case TransformKind::kLocalGridShuffle: return "local_grid_shuffle";
    case TransformKind::kColorFlatten: return "color_flatten";
  }
  return "unknown";
}

std::optional<TransformKind> parse_kind(std::string_view name) {
  using K = TransformKind;
  static constexpr std::pair<std::string_view, K> kNames[] = {
      {"baseline", K::kBaseline},
      {"none", K::kBaseline},
      {"grid_shuffle", K::kGridShuffle},
      {"grid", K::kGridShuffle},
      {"randomized_shuffle", K::kRandomizedShuffle},
      {"randomized", K::kRandomizedShuffle},
      {"random", K::kRandomizedShuffle},
      {"within_grid_shuffle", K::kWithinGridShuffle},
      {"within", K::kWithinGridShuffle},
      {"local_grid_shuffle", K::kLocalGridShuffle},
      {"local", K::kLocalGridShuffle},
      {"color_flatten", K::kColorFlatten},
      {"flatten", K::kColorFlatten},
      {"color", K::kColorFlatten},
  };
  for (const auto& [n, k] : kNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

bool uses_blocks(TransformKind kind) noexcept {
  return kind == TransformKind::kGridShuffle || kind == TransformKind::kWithinGridShuffle ||
         kind == TransformKind::kLocalGridShuffle;
}

bool uses_probability(TransformKind kind) noexcept {
  return uses_blocks(kind) || kind == TransformKind::kRandomizedShuffle;
}

void TransformSpec::validate() const {
  check_probability(probability);
  if (uses_blocks(kind) && block_size < 1) {
    throw SpecError(std::string(kind_name(kind)) + " requires a positive block size");
  }
}

std::string TransformSpec::tag() const {
  std::ostringstream out;
  out << kind_name(kind);
  if (uses_blocks(kind)) out << "/b" << block_size;
  if (uses_probability(kind)) out << "/p" << probability;
  return out.str();
}

SubsetPermutation subset_permute(std::size_t n, double p, Prng& rng) {
  check_probability(p);
  std::vector<std::uint32_t> selected;
  for (std::size_t i = 0; i < n; ++i) {
    if (rng.bernoulli(p)) selected.push_back(static_cast<std::uint32_t>(i));
  }
  std::vector<std::uint32_t> sources = selected;
  for (std::size_t i = sources.size(); i > 1; --i) {
    const std::size_t j = rng.bounded(i);
    std::swap(sources[i - 1], sources[j]);
  }
  SubsetPermutation out{identity_map(n), selected.size()};
  for (std::size_t k = 0; k < selected.size(); ++k) out.source[selected[k]] = sources[k];
  return out;
}

SourceMap grid_shuffle_map(int width, int height, int block, double p, Prng& rng) {
  check_blocks(width, height, block);
  const int bx = width / block;
  const int by = height / block;
  const auto blocks = subset_permute(static_cast<std::size_t>(bx) * static_cast<std::size_t>(by), p, rng);
  SourceMap map(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  for (int k = 0; k < bx * by; ++k) {
    const int src = static_cast<int>(blocks.source[static_cast<std::size_t>(k)]);
    const int dst_x0 = (k % bx) * block, dst_y0 = (k / bx) * block;
    const int src_x0 = (src % bx) * block, src_y0 = (src / bx) * block;
    for (int dy = 0; dy < block; ++dy) {
      for (int dx = 0; dx < block; ++dx) {
        map[static_cast<std::size_t>((dst_y0 + dy) * width + dst_x0 + dx)] =
            static_cast<std::uint32_t>((src_y0 + dy) * width + src_x0 + dx);
      }
    }
  }
  return map;
}

SourceMap randomized_shuffle_map(int width, int height, double p, Prng& rng) {
  return subset_permute(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), p, rng)
      .source;
}

SourceMap within_grid_shuffle_map(int width, int height, int block, double p, Prng& rng) {
  check_blocks(width, height, block);
  SourceMap map = identity_map(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  const std::size_t cells = static_cast<std::size_t>(block) * static_cast<std::size_t>(block);
  for (int y0 = 0; y0 < height; y0 += block) {
    for (int x0 = 0; x0 < width; x0 += block) {
      const auto local = subset_permute(cells, p, rng);
      for (std::size_t j = 0; j < cells; ++j) {
        const int src = static_cast<int>(local.source[j]);
        const int dst = static_cast<int>(j);
        map[static_cast<std::size_t>((y0 + dst / block) * width + x0 + dst % block)] =
            static_cast<std::uint32_t>((y0 + src / block) * width + x0 + src % block);
      }
    }
  }
  return map;
}

SourceMap local_grid_shuffle_map(int width, int height, int block, double p, Prng& rng) {
  const SourceMap within = within_grid_shuffle_map(width, height, block, p, rng);
  const SourceMap grid = grid_shuffle_map(width, height, block, 1.0, rng);
  SourceMap map(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) map[i] = within[grid[i]];
  return map;
}

Image gather_pixels(const Image& image, std::span<const std::uint32_t> map) {
  if (map.size() != image.pixel_count()) throw DimensionError("source map size mismatch");
  Image out(image.width(), image.height(), image.channels());
  const auto src = image.data();
  auto dst = out.data();
  const std::size_t ch = static_cast<std::size_t>(image.channels());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(map.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::size_t s = map[static_cast<std::size_t>(i)] * ch;
    const std::size_t d = static_cast<std::size_t>(i) * ch;
    for (std::size_t c = 0; c < ch; ++c) dst[d + c] = src[s + c];
  }
  return out;
}

Image gather_pixels_reference(const Image& image, std::span<const std::uint32_t> map) {
  if (map.size() != image.pixel_count()) throw DimensionError("source map size mismatch");
  Image out(image.width(), image.height(), image.channels());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const std::uint32_t s = map[static_cast<std::size_t>(y * image.width() + x)];
      const int sx = static_cast<int>(s % static_cast<std::uint32_t>(image.width()));
      const int sy = static_cast<int>(s / static_cast<std::uint32_t>(image.width()));
      for (int c = 0; c < image.channels(); ++c) out.at(x, y, c) = image.at(sx, sy, c);
    }
  }
  return out;
}

Image grid_shuffle(const Image& image, int block, double p, Prng& rng) {
  return gather_pixels(image, grid_shuffle_map(image.width(), image.height(), block, p, rng));
}

Image randomized_shuffle(const Image& image, double p, Prng& rng) {
  return gather_pixels(image, randomized_shuffle_map(image.width(), image.height(), p, rng));
}

Image within_grid_shuffle(const Image& image, int block, double p, Prng& rng) {
  return gather_pixels(image, within_grid_shuffle_map(image.width(), image.height(), block, p, rng));
}

Image local_grid_shuffle(const Image& image, int block, double p, Prng& rng) {
  return gather_pixels(image, local_grid_shuffle_map(image.width(), image.height(), block, p, rng));
}

FlattenedImage color_flatten(const Image& image) {
  if (image.channels() != 3) {
    throw DimensionError("color flatten needs a 3-channel image, got " +
                         std::to_string(image.channels()));
  }
  if (image.width() != image.height()) {
    throw DimensionError("color flatten needs a square image, got " +
                         std::to_string(image.width()) + "x" + std::to_string(image.height()));
  }
  FlattenedImage flat;
  flat.side = image.width();
  const std::size_t n = image.pixel_count();
  const auto data = image.data();
  for (std::size_t c = 0; c < 3; ++c) {
    auto& vec = flat.channels[c];
    vec.resize(n);
    for (std::size_t i = 0; i < n; ++i) vec[i] = data[3 * i + c];
  }
  return flat;
}

Image unflatten(const FlattenedImage& flat) {
  if (flat.side < 1) throw DimensionError("flattened image has no pixels");
  const std::size_t n = static_cast<std::size_t>(flat.side) * static_cast<std::size_t>(flat.side);
  for (const auto& vec : flat.channels) {
    if (vec.size() != n) {
      throw DimensionError("channel vector length " + std::to_string(vec.size()) +
                           " != N*N = " + std::to_string(n));
    }
  }
  std::vector<std::uint8_t> data(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < 3; ++c) data[3 * i + c] = flat.channels[c][i];
  }
  return Image(flat.side, flat.side, 3, std::move(data));
}

Image flatten_visualization(const FlattenedImage& flat) {
  const std::size_t n = static_cast<std::size_t>(flat.side) * static_cast<std::size_t>(flat.side);
  std::vector<std::uint8_t> data;
  data.reserve(3 * n);
  for (const auto& vec : flat.channels) {
    if (vec.size() != n) throw DimensionError("channel vector length != N*N");
    data.insert(data.end(), vec.begin(), vec.end());
  }
  return Image(flat.side, 3 * flat.side, 1, std::move(data));
}

TransformResult apply(const TransformSpec& spec, const Image& image) {
  spec.validate();
  Prng rng(spec.seed);
  switch (spec.kind) {
    case TransformKind::kBaseline:
      return image;
    case TransformKind::kGridShuffle:
      return grid_shuffle(image, spec.block_size, spec.probability, rng);
    case TransformKind::kRandomizedShuffle:
      return randomized_shuffle(image, spec.probability, rng);
    case TransformKind::kWithinGridShuffle:
      return within_grid_shuffle(image, spec.block_size, spec.probability, rng);
    case TransformKind::kLocalGridShuffle:
      return local_grid_shuffle(image, spec.block_size, spec.probability, rng);
    case TransformKind::kColorFlatten:
      return color_flatten(image);
  }
  throw SpecError("unknown transform kind");
}

Image apply_to_image(const TransformSpec& spec, const Image& image) {
  auto result = apply(spec, image);
  if (auto* flat = std::get_if<FlattenedImage>(&result)) return flatten_visualization(*flat);
  return std::get<Image>(std::move(result));
}

std::vector<TransformResult> apply_batch(std::span<const TransformSpec> specs,
                                         std::span<const Image> images) {
  if (specs.size() != images.size()) throw SpecError("apply_batch: specs/images size mismatch");
  for (const auto& spec : specs) spec.validate();
  std::vector<TransformResult> out(images.size());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(images.size());
  // Exceptions must not escape the parallel region.
  std::vector<std::string> errors(images.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      out[k] = apply(specs[k], images[k]);
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  }
  for (std::size_t k = 0; k < errors.size(); ++k) {
    if (!errors[k].empty()) throw DimensionError("item " + std::to_string(k) + ": " + errors[k]);
  }
  return out;
}

std::vector<TransformResult> apply_batch_reference(std::span<const TransformSpec> specs,
                                                   std::span<const Image> images) {
  if (specs.size() != images.size()) throw SpecError("apply_batch: specs/images size mismatch");
  std::vector<TransformResult> out;
  out.reserve(images.size());
  for (std::size_t k = 0; k < images.size(); ++k) {
    try {
      out.push_back(apply(specs[k], images[k]));
    } catch (const std::exception& e) {
      throw DimensionError("item " + std::to_string(k) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace extrans
