#include "extrans/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <string>

#include "extrans/error.hpp"

namespace extrans {

namespace {

constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Minimal PNM header tokenizer: whitespace separated, '#' comments to EOL.
class PnmReader {
 public:
  explicit PnmReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::string token() {
    skip_space_and_comments();
    std::string tok;
    while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_]) && bytes_[pos_] != '#') {
      tok.push_back(static_cast<char>(bytes_[pos_++]));
    }
    if (tok.empty()) throw FormatError("malformed PPM header: unexpected end of header");
    return tok;
  }

  int number(const char* what) {
    const std::string tok = token();
    if (!std::all_of(tok.begin(), tok.end(), [](unsigned char c) { return std::isdigit(c); }) ||
        tok.size() > 9) {
      throw FormatError(std::string("malformed PPM header: bad ") + what + " '" + tok + "'");
    }
    return std::stoi(tok);
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::span<const std::uint8_t> raster() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw FormatError("malformed PPM header: missing separator before raster");
    }
    return bytes_.subspan(pos_ + 1);
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t be32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) |
         (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
}

struct PngImageGuard {
  png_image* image;
  ~PngImageGuard() { png_image_free(image); }
};

}  // namespace

std::optional<ImageFormat> sniff_format(std::span<const std::uint8_t> bytes) noexcept {
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSignature, 8) == 0) {
    return ImageFormat::kPng;
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '6' || bytes[1] == '5')) {
    return ImageFormat::kPpm;
  }
  return std::nullopt;
}

std::optional<ImageFormat> format_from_extension(const std::filesystem::path& path) {
  const std::string ext = lower(path.extension().string());
  if (ext == ".png") return ImageFormat::kPng;
  if (ext == ".ppm" || ext == ".pgm" || ext == ".pnm") return ImageFormat::kPpm;
  return std::nullopt;
}

std::optional<ImageFormat> parse_format(std::string_view name) {
  const std::string n = lower(name);
  if (n == "png") return ImageFormat::kPng;
  if (n == "ppm" || n == "pgm" || n == "pnm") return ImageFormat::kPpm;
  return std::nullopt;
}

std::vector<std::uint8_t> encode_ppm(const Image& image) {
  const std::string header = std::string(image.channels() == 3 ? "P6" : "P5") + "\n" +
                             std::to_string(image.width()) + " " +
                             std::to_string(image.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.data().begin(), image.data().end());
  return out;
}

Image decode_ppm(std::span<const std::uint8_t> bytes) {
  PnmReader reader(bytes);
  const std::string magic = reader.token();
  int channels = 0;
  if (magic == "P6") {
    channels = 3;
  } else if (magic == "P5") {
    channels = 1;
  } else {
    throw FormatError("malformed PPM header: unsupported magic '" + magic + "'");
  }
  const int width = reader.number("width");
  const int height = reader.number("height");
  const int maxval = reader.number("maxval");
  if (width < 1 || height < 1) throw FormatError("malformed PPM header: zero dimension");
  if (maxval != 255) {
    throw FormatError("unsupported PPM bit depth: maxval " + std::to_string(maxval));
  }
  const auto raster = reader.raster();
  const std::size_t need = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                           static_cast<std::size_t>(channels);
  if (raster.size() < need) {
    throw FormatError("truncated PPM raster: " + std::to_string(raster.size()) + " of " +
                      std::to_string(need) + " bytes");
  }
  return Image(width, height, channels,
               std::vector<std::uint8_t>(raster.begin(), raster.begin() + static_cast<std::ptrdiff_t>(need)));
}

std::vector<std::uint8_t> encode_png(const Image& image) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width());
  png.height = static_cast<png_uint_32>(image.height());
  png.format = image.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  PngImageGuard guard{&png};

  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png, nullptr, &size, 0, image.data().data(), 0, nullptr)) {
    throw FormatError(std::string("PNG encode failed: ") + png.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&png, out.data(), &size, 0, image.data().data(), 0, nullptr)) {
    throw FormatError(std::string("PNG encode failed: ") + png.message);
  }
  out.resize(size);
  return out;
}

Image decode_png(std::span<const std::uint8_t> bytes) {
  // The IHDR chunk must directly follow the signature.
  if (bytes.size() < 33 || std::memcmp(bytes.data(), kPngSignature, 8) != 0 ||
      std::memcmp(bytes.data() + 12, "IHDR", 4) != 0) {
    throw FormatError("malformed PNG header");
  }
  const std::uint8_t* ihdr = bytes.data() + 16;
  const std::uint32_t width = be32(ihdr);
  const std::uint32_t height = be32(ihdr + 4);
  const int bit_depth = ihdr[8];
  const int color_type = ihdr[9];
  const int interlace = ihdr[12];
  if (bit_depth != 8) {
    throw FormatError("unsupported PNG bit depth " + std::to_string(bit_depth));
  }
  if (color_type != 0 && color_type != 2) {
    throw FormatError("unsupported PNG color type " + std::to_string(color_type) +
                      " (only 8-bit gray or RGB)");
  }
  if (interlace != 0) throw FormatError("interlaced PNG not supported");
  if (width == 0 || height == 0 || width > (1u << 16) || height > (1u << 16)) {
    throw FormatError("malformed PNG header: bad dimensions");
  }

  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  PngImageGuard guard{&png};
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
    throw FormatError(std::string("PNG decode failed: ") + png.message);
  }
  const int channels = color_type == 2 ? 3 : 1;
  png.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> data(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, data.data(), 0, nullptr)) {
    throw FormatError(std::string("PNG decode failed: ") + png.message);
  }
  return Image(static_cast<int>(width), static_cast<int>(height), channels, std::move(data));
}

std::vector<std::uint8_t> encode_image(const Image& image, ImageFormat format) {
  return format == ImageFormat::kPng ? encode_png(image) : encode_ppm(image);
}

Image decode_image(std::span<const std::uint8_t> bytes) {
  const auto format = sniff_format(bytes);
  if (!format) throw FormatError("unrecognized image format");
  return *format == ImageFormat::kPng ? decode_png(bytes) : decode_ppm(bytes);
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("short write to " + path.string());
}

Image read_image(const std::filesystem::path& path) { return decode_image(read_file(path)); }

void write_image(const std::filesystem::path& path, const Image& image,
                 std::optional<ImageFormat> format) {
  if (!format) format = format_from_extension(path);
  if (!format) throw Error("cannot infer image format from " + path.string());
  write_file(path, encode_image(image, *format));
}

}  // namespace extrans
