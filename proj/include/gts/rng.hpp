#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "gts/net.hpp"

namespace gts {

/// xoshiro256** seeded through splitmix64. Written out here because the
/// standard engines' distributions are not portable across library
/// implementations, and traces must be reproducible bit for bit.
class Rng {
 public:
  static constexpr const char* kName = "xoshiro256ss-v1";

  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t next();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  double normal(double mean, double stddev);
  double exponential(double rate);
  double sample(const DelaySpec& spec);

 private:
  std::array<std::uint64_t, 4> s_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t& state);
/// Order-sensitive combination of seed material.
std::uint64_t mix_seed(std::uint64_t seed, std::string_view salt);

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::uint64_t fnv1a(std::string_view data);
std::string hex64(std::uint64_t v);

}  // namespace gts
