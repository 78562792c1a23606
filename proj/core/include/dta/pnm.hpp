#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "dta/image.hpp"

namespace dta {

/// Sample depth of a binary PGM (P5) / PPM (P6) file.
enum class BitDepth { k8 = 8, k16 = 16 };

struct PnmHeader {
  Geometry geometry;
  BitDepth depth = BitDepth::k8;
  std::size_t data_offset = 0;
};

struct PnmImage {
  Image image;
  BitDepth depth = BitDepth::k8;
};

/// Parses a P5/P6 header (comments allowed). Throws DecodeError on malformed
/// input and FormatError for other magic numbers or unsupported maxval.
PnmHeader decode_pnm_header(std::span<const std::uint8_t> bytes);

/// Decodes P5/P6 with maxval 255 (v/255) or 65535 (big-endian, v/65535).
PnmImage decode_pnm(std::span<const std::uint8_t> bytes);

/// Canonical encoding: "P5\n<w> <h>\n<maxval>\n" followed by samples. Values
/// are clamped to [0,1] and rounded to the nearest code.
std::vector<std::uint8_t> encode_pnm(const Image& image, BitDepth depth);

PnmImage read_pnm(const std::filesystem::path& path);
Image read_image(const std::filesystem::path& path);
/// Reads only as much of the file as the header needs.
PnmHeader read_image_header(const std::filesystem::path& path);
void write_image(const Image& image, const std::filesystem::path& path, BitDepth depth = BitDepth::k8);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace dta
