#include "wlac/rng.hpp"

namespace wlac {
namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

RandomSource RandomSource::split(std::string_view tag) const {
  return RandomSource(splitmix64(seed_ ^ splitmix64(fnv1a(tag))));
}

RandomSource RandomSource::split(std::string_view tag, std::uint64_t index) const {
  return RandomSource(splitmix64(split(tag).seed() + splitmix64(index + 1)));
}

}  // namespace wlac
