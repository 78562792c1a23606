#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "dta/denoiser.hpp"

namespace dta {

/// Checkpoint container, all integers little-endian:
///
///   offset  size  field
///   0       8     magic "DTACKPT\0"
///   8       4     u32 format version (currently 1)
///   12      4     u32 precision (0 = f64, 1 = f32)
///   16      4     u32 activation (0 = silu, 1 = linear)
///   20      4     u32 image channels
///   24      4     u32 kernel size
///   28      4     u32 level count L
///   32      4L    u32 widths[L]
///   32+4L   8     u64 parameter count N
///   40+4L   N*s   parameters, IEEE-754 binary64 (s = 8) or binary32 (s = 4)
///
/// Parameters are laid out in layer_table() order, each layer as its
/// column-major Cout x (k*k*Cin) weight matrix followed by Cout biases.
inline constexpr std::uint32_t checkpoint_format_version = 1;

std::vector<std::uint8_t> encode_checkpoint(const DenoiserModel& model);
DenoiserModel decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const DenoiserModel& model, const std::filesystem::path& path);
DenoiserModel load_checkpoint(const std::filesystem::path& path);

}  // namespace dta
