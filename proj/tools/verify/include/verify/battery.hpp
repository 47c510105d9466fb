#pragma once

#include <vector>

#include <cyllevy/driver.hpp>
#include <cyllevy/integrate.hpp>
#include <cyllevy/linalg.hpp>
#include <cyllevy/modular.hpp>
#include <cyllevy/rng.hpp>

namespace cyllevy::verify {

/// Gaussian matrix scaled to the given Hilbert-Schmidt norm.
HSMap random_hsmap(Stream& rng, int dim_h, int dim_g, double hs_norm);

/// Matrix U diag(s) V^T with Haar U, V and the given singular values.
HSMap hsmap_with_singular_values(Stream& rng, int dim_h, int dim_g, const Vector& s);

/// Step function on [0, 1] with random break points; each value is a random
/// map whose HS norm is log-uniform in [hs_lo, hs_hi].
StepFunction random_step(Stream& rng, int dim_h, int dim_g, int intervals, double hs_lo, double hs_hi);

/// Q = A A^T / d with A Gaussian.
Driver gaussian_driver(Stream& rng, int d);
/// Three atoms of norms 0.6, 1.5 and 2.5 in random directions, rates 1.0,
/// 0.7, 0.4 and a small random drift.
Driver compound_poisson_driver(Stream& rng, int d);
Driver canonical_stable_driver(int d, double alpha);
/// alpha_k spread over [0.7, 1.9], scales 1 / (1 + k).
Driver diagonal_stable_driver(int d);

struct NamedDriver {
  std::string name;
  Driver driver;
};

/// gaussian, canonical-stable (1.5), diagonal-stable, compound-poisson and
/// their sum gaussian + compound-poisson.
std::vector<NamedDriver> all_driver_kinds(Stream& rng, int d);

/// Multiplies a step function by the predictable factor that equals 1 after
/// time `switch_time` when <L(switch_time), e_0> > 0 and `other` otherwise;
/// before switch_time the factor is 1. The partition must contain
/// switch_time.
StepProcess switched(const StepFunction& psi, double switch_time, double other);

}  // namespace cyllevy::verify
