#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace qosim {

/// A named, seeded random stream.
///
/// The generator is xoshiro256** with its state expanded by SplitMix64 from
/// `hash(name) ^ seed`, so an identical (name, seed) pair yields the same
/// sequence on every platform and streams with different names never share
/// state.
class RngStream {
 public:
  RngStream(std::string name, std::uint64_t seed);

  const std::string& name() const noexcept { return name_; }
  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() noexcept;

  /// Uniform on (0, 1]; never returns 0 so -ln(u) stays finite.
  double uniform_open0() noexcept;

  /// Uniform on [0, 1).
  double uniform() noexcept;

 private:
  std::string name_;
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_{};
};

/// FNV-1a, used to turn stream names into seed material.
std::uint64_t fnv1a64(std::string_view text) noexcept;

/// Returns -mean * ln(u) for u ~ U(0,1]. Throws PreconditionError if mean <= 0.
double sample_exponential(RngStream& stream, double mean);

/// Identity draw for "constant" distributions. Throws on negative input.
double sample_constant(double value);

}  // namespace qosim
