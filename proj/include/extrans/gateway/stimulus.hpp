#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "extrans/cifar.hpp"
#include "extrans/experiment/schedule.hpp"
#include "extrans/image.hpp"

namespace extrans::gateway {

inline constexpr int kDisplaySide = 128;

/// Human stimulus: the 32x32 source scaled to display_side x display_side
/// by scale_linear, then the trial's transform applied with
/// trial.display_seed. ColorFlatten renders as its stacked-planes
/// visualization (display_side wide, 3 x display_side tall).
Image render_human_stimulus(const Dataset& dataset, const experiment::Trial& trial,
                            int display_side = kDisplaySide);

/// Machine stimulus: the transform applied at native resolution with
/// trial.spec.seed.
Image render_machine_stimulus(const Dataset& dataset, const experiment::Trial& trial);

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Throws FormatError on characters outside the standard alphabet.
std::vector<std::uint8_t> base64_decode(std::string_view text);

}  // namespace extrans::gateway
