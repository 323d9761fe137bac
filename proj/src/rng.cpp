#include "hazardband/rng.hpp"

namespace hazardband {

namespace rng {

std::uint64_t hash_label(std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace rng

Xoshiro256pp::Xoshiro256pp(std::uint64_t key) {
  std::uint64_t state = key;
  for (auto& word : s_) word = rng::splitmix64(state);
}

std::uint64_t stream_key(const SeedSpec& seed, std::uint64_t tag) {
  std::uint64_t h = rng::combine(0x243f6a8885a308d3ULL, seed.master_seed);
  h = rng::combine(h, seed.study);
  h = rng::combine(h, seed.replicate);
  return rng::combine(h, tag);
}

}  // namespace hazardband
