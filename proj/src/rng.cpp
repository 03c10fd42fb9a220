#include "qosim/rng.hpp"

#include <cmath>

#include "qosim/error.hpp"

namespace qosim {
namespace {

std::uint64_t splitmix64(std::uint64_t& x) noexcept {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RngStream::RngStream(std::string name, std::uint64_t seed)
    : name_(std::move(name)), seed_(seed) {
  std::uint64_t x = fnv1a64(name_) ^ splitmix64(seed);
  for (auto& word : state_) word = splitmix64(x);
}

std::uint64_t RngStream::next_u64() noexcept {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double RngStream::uniform_open0() noexcept {
  // 53 random bits mapped onto {1, ..., 2^53} / 2^53.
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double RngStream::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double sample_exponential(RngStream& stream, double mean) {
  if (!(mean > 0.0)) {
    throw PreconditionError("exponential mean must be > 0, got " +
                            std::to_string(mean));
  }
  return -mean * std::log(stream.uniform_open0());
}

double sample_constant(double value) {
  if (value < 0.0) {
    throw PreconditionError("constant value must be >= 0, got " +
                            std::to_string(value));
  }
  return value;
}

}  // namespace qosim
