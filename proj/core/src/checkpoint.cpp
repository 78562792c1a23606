#include "dta/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "dta/error.hpp"
#include "dta/pnm.hpp"

namespace dta {
namespace {

constexpr char kMagic[8] = {'D', 'T', 'A', 'C', 'K', 'P', 'T', '\0'};

class Writer {
 public:
  void bytes(const void* src, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(src);
    out.insert(out.end(), p, p + n);
  }
  template <typename U>
  void le(U value) {
    for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
  }
  std::vector<std::uint8_t> out;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  template <typename U>
  U le() {
    if (pos_ + sizeof(U) > in_.size()) throw DecodeError("truncated checkpoint", pos_);
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(in_[pos_ + i]) << (8 * i);
    pos_ += sizeof(U);
    return value;
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    if (pos_ + n > in_.size()) throw DecodeError("truncated checkpoint", pos_);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const DenoiserModel& model) {
  const Architecture& arch = model.architecture();
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.le<std::uint32_t>(checkpoint_format_version);
  w.le<std::uint32_t>(static_cast<std::uint32_t>(model.precision()));
  w.le<std::uint32_t>(static_cast<std::uint32_t>(arch.activation));
  w.le<std::uint32_t>(static_cast<std::uint32_t>(arch.image_channels));
  w.le<std::uint32_t>(static_cast<std::uint32_t>(arch.kernel));
  w.le<std::uint32_t>(static_cast<std::uint32_t>(arch.widths.size()));
  for (std::size_t width : arch.widths) w.le<std::uint32_t>(static_cast<std::uint32_t>(width));
  w.le<std::uint64_t>(model.parameter_count());
  for (double v : model.parameters()) {
    if (model.precision() == Precision::f32) {
      w.le<std::uint32_t>(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    } else {
      w.le<std::uint64_t>(std::bit_cast<std::uint64_t>(v));
    }
  }
  return std::move(w.out);
}

DenoiserModel decode_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const auto magic = r.take(sizeof kMagic);
  if (std::memcmp(magic.data(), kMagic, sizeof kMagic) != 0) throw FormatError("not a dta checkpoint (bad magic)");
  const auto version = r.le<std::uint32_t>();
  if (version != checkpoint_format_version) {
    throw FormatError("unsupported checkpoint format version " + std::to_string(version));
  }
  const auto precision_tag = r.le<std::uint32_t>();
  const auto activation_tag = r.le<std::uint32_t>();
  if (precision_tag > 1) throw DecodeError("invalid precision tag", 12);
  if (activation_tag > 1) throw DecodeError("invalid activation tag", 16);

  Architecture arch;
  arch.activation = static_cast<Activation>(activation_tag);
  arch.image_channels = r.le<std::uint32_t>();
  arch.kernel = r.le<std::uint32_t>();
  const auto levels = r.le<std::uint32_t>();
  if (levels == 0 || levels > 6) throw DecodeError("invalid level count", 28);
  arch.widths.clear();
  for (std::uint32_t i = 0; i < levels; ++i) arch.widths.push_back(r.le<std::uint32_t>());

  const auto precision = static_cast<Precision>(precision_tag);
  DenoiserModel model(arch, precision);
  const std::size_t count_offset = r.position();
  const auto count = r.le<std::uint64_t>();
  if (count != model.parameter_count()) {
    throw DecodeError("parameter count " + std::to_string(count) + " does not match architecture", count_offset);
  }
  const std::size_t width = precision == Precision::f32 ? 4 : 8;
  if (r.remaining() != count * width) throw DecodeError("parameter block size mismatch", r.position());
  std::vector<double> params(count);
  for (auto& v : params) {
    v = precision == Precision::f32 ? static_cast<double>(std::bit_cast<float>(r.le<std::uint32_t>()))
                                    : std::bit_cast<double>(r.le<std::uint64_t>());
  }
  model.set_parameters(std::move(params));
  return model;
}

void save_checkpoint(const DenoiserModel& model, const std::filesystem::path& path) {
  write_file(path, encode_checkpoint(model));
}

DenoiserModel load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_file(path)); }

}  // namespace dta
