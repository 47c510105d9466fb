#pragma once

#include <cyllevy/linalg.hpp>
#include <cyllevy/rng.hpp>

namespace cyllevy::testing {

inline Stream test_stream(std::uint64_t task, std::uint64_t seed = 20240531) {
  return Stream(seed, StreamModule::kTest, task);
}

/// Gaussian matrix scaled to the requested Hilbert-Schmidt norm.
inline HSMap random_hsmap(Stream& rng, int dim_h, int dim_g, double hs_norm) {
  Matrix m(dim_h, dim_g);
  for (int j = 0; j < dim_g; ++j)
    for (int i = 0; i < dim_h; ++i) m(i, j) = rng.normal();
  return HSMap(hs_norm / m.norm() * m);
}

inline Vector random_vector(Stream& rng, int dim, double scale = 1.0) {
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = scale * rng.normal();
  return v;
}

}  // namespace cyllevy::testing
