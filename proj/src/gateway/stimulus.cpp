#include "extrans/gateway/stimulus.hpp"

#include <array>

#include "extrans/error.hpp"
#include "extrans/scale.hpp"
#include "extrans/transforms.hpp"

namespace extrans::gateway {

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

const LabeledImage& source(const Dataset& dataset, const experiment::Trial& trial) {
  if (trial.image_index >= dataset.size()) {
    throw Error("trial " + std::to_string(trial.trial_id) + " references image " +
                std::to_string(trial.image_index) + " beyond dataset size " +
                std::to_string(dataset.size()));
  }
  return dataset.records[trial.image_index];
}

}  // namespace

Image render_human_stimulus(const Dataset& dataset, const experiment::Trial& trial,
                            int display_side) {
  const Image scaled = scale_linear(source(dataset, trial).image, display_side, display_side);
  TransformSpec spec = trial.spec;
  spec.seed = trial.display_seed;
  return apply_to_image(spec, scaled);
}

Image render_machine_stimulus(const Dataset& dataset, const experiment::Trial& trial) {
  return apply_to_image(trial.spec, source(dataset, trial).image);
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (std::uint32_t{bytes[i]} << 16) | (std::uint32_t{bytes[i + 1]} << 8) | bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  if (i < bytes.size()) {
    std::uint32_t v = std::uint32_t{bytes[i]} << 16;
    if (i + 1 < bytes.size()) v |= std::uint32_t{bytes[i + 1]} << 8;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += i + 1 < bytes.size() ? kAlphabet[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  std::array<int, 256> table;
  table.fill(-1);
  for (int k = 0; k < 64; ++k) table[static_cast<unsigned char>(kAlphabet[k])] = k;
  std::vector<std::uint8_t> out;
  std::uint32_t acc = 0;
  int bits = 0;
  for (char c : text) {
    if (c == '=') break;
    const int v = table[static_cast<unsigned char>(c)];
    if (v < 0) throw FormatError("invalid base64 character");
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xff));
    }
  }
  return out;
}

}  // namespace extrans::gateway
