#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "extrans/image.hpp"

namespace extrans {

enum class ImageFormat { kPng, kPpm };

/// Guesses the format from leading magic bytes.
std::optional<ImageFormat> sniff_format(std::span<const std::uint8_t> bytes) noexcept;
/// ".png" or ".ppm"/".pgm"/".pnm" (case-insensitive).
std::optional<ImageFormat> format_from_extension(const std::filesystem::path& path);
std::optional<ImageFormat> parse_format(std::string_view name);

/// PPM (P6, maxval 255) for RGB images; PGM (P5) for grayscale.
std::vector<std::uint8_t> encode_ppm(const Image& image);
Image decode_ppm(std::span<const std::uint8_t> bytes);

/// 8-bit, non-interlaced RGB or grayscale PNG. Other bit depths, palette,
/// alpha and Adam7 interlacing are rejected with FormatError.
std::vector<std::uint8_t> encode_png(const Image& image);
Image decode_png(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_image(const Image& image, ImageFormat format);
Image decode_image(std::span<const std::uint8_t> bytes);

Image read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const Image& image,
                 std::optional<ImageFormat> format = std::nullopt);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace extrans
