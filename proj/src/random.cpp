#include "themis/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace themis::rng {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive(std::uint64_t seed, std::initializer_list<std::uint64_t> coords) {
  std::uint64_t h = splitmix64(seed ^ 0x5348454d4953ULL);
  for (std::uint64_t c : coords) h = splitmix64(h ^ splitmix64(c + 0x632be59bd9b4e019ULL));
  return h;
}

std::uint64_t Stream::next_u64() { return splitmix64(key_ + (counter_++) * kGolden); }

double Stream::uniform() {
  // 53 random bits mapped into the open interval (0, 1).
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Stream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

double Stream::truncated_normal(double mean, double std, double lower, double upper) {
  if (std <= 0.0) return std::clamp(mean, lower, upper);
  double x = mean;
  for (int attempt = 0; attempt < 64; ++attempt) {
    x = mean + std * normal();
    if (x >= lower && x <= upper) return x;
  }
  return std::clamp(x, lower, upper);
}

}  // namespace themis::rng
