#pragma once

#include <cstdint>
#include <limits>

namespace cyllevy {

/// Identifies the component that owns a random stream. Streams derived for
/// different modules never share a key even under the same master seed.
enum class StreamModule : std::uint64_t {
  kLinalg = 1,
  kCharacteristics = 2,
  kModular = 3,
  kDriver = 4,
  kIntegrate = 5,
  kCli = 6,
  kTest = 7,
};

/// Counter-based random stream. The n-th output is a SplitMix64 finalizer
/// applied to `key + n * golden`, so a stream is fully described by its key
/// and position. Streams are cheap to create and are never shared between
/// threads; parallel tasks derive their own child streams.
///
/// Satisfies UniformRandomBitGenerator so it can drive <random>
/// distributions, but the samplers used by the library (uniform, normal,
/// exponential, small-mean Poisson) are implemented here so outputs do not
/// depend on the standard library vendor.
class Stream {
 public:
  using result_type = std::uint64_t;

  Stream(std::uint64_t seed, StreamModule module, std::uint64_t task);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  /// Child stream for parallel task `task`. Independent of the parent's
  /// position, so the split is order-free.
  [[nodiscard]] Stream split(std::uint64_t task) const;

  [[nodiscard]] std::uint64_t key() const { return key_; }
  [[nodiscard]] std::uint64_t position() const { return counter_; }

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  double exponential();
  std::uint64_t poisson(double mean);

 private:
  explicit Stream(std::uint64_t key) : key_(key) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

std::uint64_t mix64(std::uint64_t x);

}  // namespace cyllevy
