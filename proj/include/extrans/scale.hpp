#pragma once

#include "extrans/image.hpp"

namespace extrans {

/// Bilinear resize using the half-pixel-center convention: output sample i
/// reads source coordinate (i + 0.5) * in/out - 0.5, clamped to
/// [0, in - 1]. Channels are interpolated independently and rounded to
/// nearest, ties away from zero. Rows are processed in parallel.
Image scale_linear(const Image& image, int out_width, int out_height);

/// Single-threaded per-pixel evaluation of the same formula. Kept as the
/// reference the parallel kernel is tested against.
Image scale_linear_reference(const Image& image, int out_width, int out_height);

}  // namespace extrans
