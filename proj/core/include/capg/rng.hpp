#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace capg {

/// splitmix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives a stream key from a master seed and a sequence of labels. Each
/// label is folded in through mix64, so (master, 3, 1) and (master, 1, 3)
/// give unrelated streams.
constexpr std::uint64_t derive_stream(std::uint64_t master,
                                      std::initializer_list<std::uint64_t> labels) noexcept {
  std::uint64_t key = mix64(master);
  for (const auto label : labels) key = mix64(key ^ mix64(label + 0x632be59bd9b4e019ULL));
  return key;
}

/// Seeded random stream: one engine plus the standard normal it feeds.
/// Copying an Rng forks the stream, including any cached normal variate.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace capg
