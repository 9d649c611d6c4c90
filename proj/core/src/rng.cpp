#include "mmboot/rng.hpp"

namespace mmboot {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, Stream purpose, std::uint64_t a,
                          std::uint64_t b) noexcept {
  std::uint64_t h = mix64(master);
  h = mix64(h ^ (static_cast<std::uint64_t>(purpose) * 0xd6e8feb86659fd93ULL));
  h = mix64(h ^ (a * 0xa0761d6478bd642fULL));
  h = mix64(h ^ (b * 0xe7037ed1a0b428dbULL));
  return h;
}

std::uint64_t entropy_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ static_cast<std::uint64_t>(rd());
}

}  // namespace mmboot
