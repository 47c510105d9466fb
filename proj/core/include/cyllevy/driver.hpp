#pragma once

#include <complex>
#include <cstdint>
#include <string_view>
#include <vector>

#include "cyllevy/characteristics.hpp"
#include "cyllevy/linalg.hpp"
#include "cyllevy/rng.hpp"

namespace cyllevy {

enum class DriverKind { kGaussian, kCanonicalStable, kDiagonalStable, kCompoundPoisson, kSum };

std::string_view to_string(DriverKind kind);
DriverKind driver_kind_from_string(std::string_view name);

/// Kind implied by the Levy measure variant (zero measure means gaussian).
DriverKind kind_of(const CylCharacteristics& chars);

/// Immutable descriptor of a cylindrical Levy process on the G truncation.
/// Samplers per kind:
///  - gaussian: sqrt(dt) Q^{1/2} N plus dt a.
///  - canonical-stable: sqrt(2 dt^{2/alpha} A) N with A positive
///    (alpha/2)-stable, which has symbol -dt |g|^alpha.
///  - diagonal-stable: independent coordinates scale_k dt^{1/alpha_k} Y_k.
///  - compound-poisson: Poisson(dt sum r_j) jumps drawn from the atoms plus
///    the uncompensated drift.
///  - sum: independent components drawn in order and added.
class Driver {
 public:
  explicit Driver(CylCharacteristics chars);
  static Driver sum(const std::vector<Driver>& parts);

  [[nodiscard]] DriverKind kind() const { return kind_; }
  [[nodiscard]] int dim_g() const { return components_.front().chars.dim_g(); }
  [[nodiscard]] std::size_t component_count() const { return components_.size(); }
  [[nodiscard]] const CylCharacteristics& component(std::size_t i) const {
    return components_.at(i).chars;
  }
  /// Characteristics of a single-component driver; throws UnsupportedError
  /// for sums.
  [[nodiscard]] const CylCharacteristics& chars() const;

  [[nodiscard]] GenuineTriplet triplet(const HSMap& phi) const;
  [[nodiscard]] std::complex<double> symbol(const Vector& g) const;

  /// Draw of L(t + dt) - L(t) in G. When `jumps` is non-null the number of
  /// compound-Poisson jumps in the draw is added to it.
  Vector sample_g_increment(double dt, Stream& rng, int* jumps = nullptr) const;

 private:
  struct Component {
    CylCharacteristics chars;
    Matrix gauss_factor;  // empty when Q = 0
    Vector drift;
    std::vector<double> cumulative_rates;
  };

  Driver() = default;
  static Component prepare(CylCharacteristics chars);

  DriverKind kind_ = DriverKind::kGaussian;
  std::vector<Component> components_;
};

/// Radonified increment phi (L(t + dt) - L(t)).
HVec sample_increment(const Driver& driver, const HSMap& phi, double dt, Stream& rng);

/// Radonified increments of one path over a partition.
struct PathTable {
  Partition partition;
  Matrix increments;              // d_H x intervals
  std::vector<int> jump_counts;   // per interval
  std::uint64_t seed = 0;         // key of the stream that produced the path
};

/// Increments are drawn interval by interval from `rng` in time order.
PathTable sample_path(const Driver& driver, const HSMap& phi, const Partition& partition,
                      Stream& rng);

/// G-valued increments (d_G x intervals) drawn the same way as sample_path.
Matrix sample_g_path(const Driver& driver, const Partition& partition, Stream& rng,
                     std::vector<int>* jump_counts = nullptr);

/// Sums the increments of `fine` over the intervals of `coarse`, which fine
/// must refine.
PathTable aggregate(const PathTable& fine, const Partition& coarse);

/// Independent copy of a driver: same characteristics, own randomness.
class DecoupledDriver {
 public:
  [[nodiscard]] const Driver& driver() const { return driver_; }
  [[nodiscard]] const Stream& stream() const { return stream_; }

  Vector sample_g_increment(double dt, int* jumps = nullptr) {
    return driver_.sample_g_increment(dt, stream_, jumps);
  }

 private:
  friend DecoupledDriver decoupled_driver(const Driver&, const Stream&, Stream);
  DecoupledDriver(Driver driver, Stream stream)
      : driver_(std::move(driver)), stream_(std::move(stream)) {}

  Driver driver_;
  Stream stream_;
};

/// Throws DomainError when `fresh` has the same key as `original`.
DecoupledDriver decoupled_driver(const Driver& driver, const Stream& original, Stream fresh);

}  // namespace cyllevy
