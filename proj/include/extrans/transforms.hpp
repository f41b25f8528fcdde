#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "extrans/image.hpp"
#include "extrans/prng.hpp"

namespace extrans {

enum class TransformKind {
  kBaseline,
  kGridShuffle,
  kRandomizedShuffle,
  kWithinGridShuffle,
  kLocalGridShuffle,
  kColorFlatten,
};

/// Canonical snake_case name ("grid_shuffle", ...).
std::string_view kind_name(TransformKind kind) noexcept;
/// Accepts canonical names and the short CLI aliases
/// (baseline, grid, random/randomized, within, local, flatten/color).
std::optional<TransformKind> parse_kind(std::string_view name);

bool uses_blocks(TransformKind kind) noexcept;
bool uses_probability(TransformKind kind) noexcept;

struct TransformSpec {
  TransformKind kind = TransformKind::kBaseline;
  int block_size = 0;        // grid kinds only
  double probability = 1.0;  // in [0, 1]
  std::uint64_t seed = 0;

  /// Throws SpecError when probability is outside [0, 1] or a grid kind
  /// has a non-positive block size.
  void validate() const;

  /// Compact tag such as "within_grid_shuffle/b8/p0.5".
  std::string tag() const;

  friend bool operator==(const TransformSpec&, const TransformSpec&) = default;
};

/// Three row-major channel vectors of length side*side.
struct FlattenedImage {
  int side = 0;
  std::array<std::vector<std::uint8_t>, 3> channels;

  friend bool operator==(const FlattenedImage&, const FlattenedImage&) = default;
};

using TransformResult = std::variant<Image, FlattenedImage>;

/// Output position i takes its contents from input position source[i].
using SourceMap = std::vector<std::uint32_t>;

struct SubsetPermutation {
  SourceMap source;
  std::size_t selected = 0;
};

/// Selects each of n positions independently with probability p (one
/// Bernoulli draw per position, ascending order), then rearranges the
/// selected positions by a Fisher-Yates shuffle of the selected list
/// (i from m-1 down to 1, j = bounded(i+1)). Unselected positions map to
/// themselves; fixed points among the selected are allowed.
SubsetPermutation subset_permute(std::size_t n, double p, Prng& rng);

/// Pixel source maps (indices are row-major pixel positions).
SourceMap grid_shuffle_map(int width, int height, int block, double p, Prng& rng);
SourceMap randomized_shuffle_map(int width, int height, double p, Prng& rng);
SourceMap within_grid_shuffle_map(int width, int height, int block, double p, Prng& rng);
SourceMap local_grid_shuffle_map(int width, int height, int block, double p, Prng& rng);

/// Moves whole pixels: out pixel i = in pixel map[i]. Parallel over pixels.
Image gather_pixels(const Image& image, std::span<const std::uint32_t> map);
/// Serial reference for gather_pixels.
Image gather_pixels_reference(const Image& image, std::span<const std::uint32_t> map);

Image grid_shuffle(const Image& image, int block, double p, Prng& rng);
Image randomized_shuffle(const Image& image, double p, Prng& rng);
Image within_grid_shuffle(const Image& image, int block, double p, Prng& rng);
/// within_grid_shuffle(p) followed by grid_shuffle(p = 1) on one stream.
Image local_grid_shuffle(const Image& image, int block, double p, Prng& rng);

FlattenedImage color_flatten(const Image& image);
Image unflatten(const FlattenedImage& flat);

/// The three channel planes stacked vertically as a side x 3*side
/// grayscale image (R on top).
Image flatten_visualization(const FlattenedImage& flat);

/// Dispatches on spec.kind with a fresh Prng(spec.seed).
TransformResult apply(const TransformSpec& spec, const Image& image);

/// apply(), rendering ColorFlatten through flatten_visualization.
Image apply_to_image(const TransformSpec& spec, const Image& image);

/// Pairwise apply over (specs[i], images[i]); items run in parallel.
std::vector<TransformResult> apply_batch(std::span<const TransformSpec> specs,
                                         std::span<const Image> images);
/// Serial reference for apply_batch.
std::vector<TransformResult> apply_batch_reference(std::span<const TransformSpec> specs,
                                                   std::span<const Image> images);

}  // namespace extrans
