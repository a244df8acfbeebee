#pragma once

#include <cstdint>
#include <initializer_list>

namespace themis::rng {

std::uint64_t splitmix64(std::uint64_t x);

/// Folds a list of coordinates (seed, year, sample, ...) into one stream key.
std::uint64_t derive(std::uint64_t seed, std::initializer_list<std::uint64_t> coords);

/// Counter-based stream: the n-th draw is splitmix64(key + n * golden), so a
/// stream depends only on its key, never on the order streams are consumed.
class Stream {
 public:
  explicit Stream(std::uint64_t key) : key_(key) {}
  Stream(std::uint64_t seed, std::initializer_list<std::uint64_t> coords) : key_(derive(seed, coords)) {}

  std::uint64_t next_u64();
  double uniform();  // in (0, 1)
  double normal();   // Box-Muller

  /// Normal draw restricted to [lower, upper] by rejection; after 64 misses
  /// the last draw is clamped.
  double truncated_normal(double mean, double std, double lower, double upper);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace themis::rng
