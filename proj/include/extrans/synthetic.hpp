#pragma once

#include <cstddef>
#include <cstdint>

#include "extrans/cifar.hpp"
#include "extrans/image.hpp"

namespace extrans {

/// Smooth synthetic scene: gradients, a disc and a bar. Neighbouring
/// pixels are strongly correlated, like a natural photograph.
Image synthetic_scene(int side, std::uint64_t seed);

/// Test split in CIFAR-100 shape for running without the real data;
/// record i has fine label i % 100 and coarse label fine / 5.
Dataset synthetic_dataset(std::size_t count, std::uint64_t seed);

}  // namespace extrans
