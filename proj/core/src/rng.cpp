#include "dta/rng.hpp"

namespace dta {
namespace {

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

void push64(std::vector<std::uint32_t>& words, std::uint64_t value) {
  words.push_back(static_cast<std::uint32_t>(value & 0xffffffffU));
  words.push_back(static_cast<std::uint32_t>(value >> 32));
}

}  // namespace

SeedStream::SeedStream(std::uint64_t master_seed) : master_(master_seed) { push64(path_, master_seed); }

SeedStream SeedStream::child(std::string_view name) const {
  SeedStream next = *this;
  // Tag words keep a name and an index with the same 64-bit value distinct.
  next.path_.push_back(0x6e616d65U);
  push64(next.path_, fnv1a(name));
  return next;
}

SeedStream SeedStream::child(std::uint64_t index) const {
  SeedStream next = *this;
  next.path_.push_back(0x696e6478U);
  push64(next.path_, index);
  return next;
}

Engine SeedStream::engine() const {
  std::seed_seq seq(path_.begin(), path_.end());
  return Engine(seq);
}

}  // namespace dta
