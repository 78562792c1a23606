#include "dta/pnm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "dta/error.hpp"

namespace dta {
namespace {

bool is_space(std::uint8_t ch) { return ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' || ch == '\v' || ch == '\f'; }

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t number() {
    skip_separators();
    if (pos_ >= bytes_.size()) throw DecodeError("truncated header", pos_);
    if (bytes_[pos_] < '0' || bytes_[pos_] > '9') throw DecodeError("expected a decimal number", pos_);
    std::size_t value = 0;
    while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > (1u << 30)) throw DecodeError("header value too large", pos_);
      ++pos_;
    }
    if (pos_ >= bytes_.size()) throw DecodeError("truncated header", pos_);
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_start() {
    if (pos_ >= bytes_.size() || !is_space(bytes_[pos_])) throw DecodeError("expected whitespace after maxval", pos_);
    return pos_ + 1;
  }

 private:
  void skip_separators() {
    while (pos_ < bytes_.size()) {
      if (is_space(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

}  // namespace

PnmHeader decode_pnm_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2) throw DecodeError("truncated magic number", bytes.size());
  if (bytes[0] == 0x89 && bytes.size() >= 4 && bytes[1] == 'P' && bytes[2] == 'N' && bytes[3] == 'G') {
    throw FormatError("PNG input is not supported by this build; convert to PGM/PPM");
  }
  if (bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw FormatError("unsupported image format (expected binary P5 or P6)");
  }
  HeaderReader reader(bytes);
  PnmHeader header;
  header.geometry.channels = bytes[1] == '5' ? 1 : 3;
  header.geometry.width = reader.number();
  header.geometry.height = reader.number();
  const std::size_t maxval = reader.number();
  if (header.geometry.width == 0 || header.geometry.height == 0) throw DecodeError("zero image dimension", 2);
  if (maxval == 255) {
    header.depth = BitDepth::k8;
  } else if (maxval == 65535) {
    header.depth = BitDepth::k16;
  } else {
    throw FormatError("unsupported maxval " + std::to_string(maxval) + " (expected 255 or 65535)");
  }
  header.data_offset = reader.raster_start();
  return header;
}

PnmImage decode_pnm(std::span<const std::uint8_t> bytes) {
  const PnmHeader header = decode_pnm_header(bytes);
  const std::size_t sample_bytes = header.depth == BitDepth::k8 ? 1 : 2;
  const std::size_t count = header.geometry.size();
  const std::size_t needed = header.data_offset + count * sample_bytes;
  if (bytes.size() < needed) throw DecodeError("truncated raster", bytes.size());

  std::vector<double> values(count);
  const std::uint8_t* raster = bytes.data() + header.data_offset;
  if (header.depth == BitDepth::k8) {
    for (std::size_t i = 0; i < count; ++i) values[i] = raster[i] / 255.0;
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const unsigned code = (static_cast<unsigned>(raster[2 * i]) << 8) | raster[2 * i + 1];
      values[i] = code / 65535.0;
    }
  }
  return PnmImage{Image(header.geometry, std::move(values)), header.depth};
}

std::vector<std::uint8_t> encode_pnm(const Image& image, BitDepth depth) {
  if (image.channels() != 1 && image.channels() != 3) {
    throw FormatError("PNM output supports 1 or 3 channels, got " + std::to_string(image.channels()));
  }
  const unsigned maxval = depth == BitDepth::k8 ? 255 : 65535;
  const std::string header = std::string(image.channels() == 1 ? "P5" : "P6") + "\n" + std::to_string(image.width()) +
                             " " + std::to_string(image.height()) + "\n" + std::to_string(maxval) + "\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  bytes.reserve(header.size() + image.size() * (depth == BitDepth::k8 ? 1 : 2));
  for (double v : image.data()) {
    const double clamped = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0;
    const auto code = static_cast<unsigned>(std::lround(clamped * maxval));
    if (depth == BitDepth::k16) bytes.push_back(static_cast<std::uint8_t>(code >> 8));
    bytes.push_back(static_cast<std::uint8_t>(code & 0xff));
  }
  return bytes;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

PnmImage read_pnm(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_pnm(bytes);
  } catch (const DecodeError& e) {
    throw DecodeError(path.string() + ": " + e.reason(), e.offset());
  }
}

Image read_image(const std::filesystem::path& path) { return read_pnm(path).image; }

PnmHeader read_image_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> head(512);
  in.read(reinterpret_cast<char*>(head.data()), static_cast<std::streamsize>(head.size()));
  head.resize(static_cast<std::size_t>(in.gcount()));
  return decode_pnm_header(head);
}

void write_image(const Image& image, const std::filesystem::path& path, BitDepth depth) {
  write_file(path, encode_pnm(image, depth));
}

}  // namespace dta
