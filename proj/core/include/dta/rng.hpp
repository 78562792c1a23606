#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace dta {

using Engine = std::mt19937_64;

/// A named position in the tree of random streams rooted at one master seed.
///
/// Every consumer of randomness (training, synthesis, each image/level of a
/// sweep) derives its own child stream, so components reproduce independently
/// of evaluation order. Engines are seeded through std::seed_seq, whose output
/// is fixed by the standard.
class SeedStream {
 public:
  explicit SeedStream(std::uint64_t master_seed);

  SeedStream child(std::string_view name) const;
  SeedStream child(std::uint64_t index) const;

  Engine engine() const;

  std::uint64_t master_seed() const noexcept { return master_; }
  const std::vector<std::uint32_t>& path() const noexcept { return path_; }

 private:
  std::uint64_t master_;
  std::vector<std::uint32_t> path_;
};

}  // namespace dta
