#include "cyllevy/rng.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace cyllevy {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

Stream::Stream(std::uint64_t seed, StreamModule module, std::uint64_t task)
    : key_(mix64(mix64(seed ^ kGolden) ^
                 mix64(static_cast<std::uint64_t>(module) * 0x632be59bd9b4e019ULL)) ^
           mix64(task + 0x2545f4914f6cdd1dULL)) {}

Stream::result_type Stream::operator()() {
  return mix64(key_ + (++counter_) * kGolden);
}

Stream Stream::split(std::uint64_t task) const {
  return Stream(mix64(key_ ^ mix64(task * kGolden + 0x8cb92ba72f3d8dd7ULL)));
}

double Stream::uniform() {
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double Stream::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform()));
  const double phi = 2.0 * std::numbers::pi * uniform();
  cached_normal_ = r * std::sin(phi);
  has_cached_normal_ = true;
  return r * std::cos(phi);
}

double Stream::exponential() { return -std::log(uniform()); }

std::uint64_t Stream::poisson(double mean) {
  if (!(mean > 0.0)) return 0;
  if (mean < 30.0) {
    // Inversion by sequential search.
    const double u = uniform();
    double p = std::exp(-mean);
    double cdf = p;
    std::uint64_t k = 0;
    while (u > cdf && k < 1000) {
      ++k;
      p *= mean / static_cast<double>(k);
      cdf += p;
    }
    return k;
  }
  std::poisson_distribution<std::uint64_t> dist(mean);
  return dist(*this);
}

}  // namespace cyllevy
