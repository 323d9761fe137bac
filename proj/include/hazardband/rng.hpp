#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace hazardband {

/// Coordinates of one random stream: a master seed and a (study, replicate)
/// pair. Identical SeedSpecs give identical streams on any thread count.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t study = 0;
  std::uint64_t replicate = 0;
};

// Tags separating independent uses of the same (study, replicate) coordinate.
namespace stream_tag {
inline constexpr std::uint64_t multipliers = 0x6d756c74ULL;
inline constexpr std::uint64_t bridge = 0x62726467ULL;
inline constexpr std::uint64_t data = 0x64617461ULL;
inline constexpr std::uint64_t subject = 0x7375626aULL;
inline constexpr std::uint64_t group1 = 0x67727031ULL;
inline constexpr std::uint64_t group2 = 0x67727032ULL;
}  // namespace stream_tag

namespace rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Order-sensitive combination of a running hash with one more word.
inline std::uint64_t combine(std::uint64_t h, std::uint64_t v) {
  std::uint64_t s = h ^ (v * 0xff51afd7ed558ccdULL + 0x632be59bd9b4e019ULL);
  return splitmix64(s);
}

/// FNV-1a hash of a label, used to key streams by transition name.
std::uint64_t hash_label(std::string_view label);

}  // namespace rng

/// xoshiro256++ generator. Satisfies UniformRandomBitGenerator.
class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256pp(std::uint64_t key);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform on the open interval (0, 1); never returns 0 or 1.
  double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
};

std::uint64_t stream_key(const SeedSpec& seed, std::uint64_t tag);

inline Xoshiro256pp make_stream(const SeedSpec& seed, std::uint64_t tag) {
  return Xoshiro256pp(stream_key(seed, tag));
}

}  // namespace hazardband
