#pragma once

#include <vector>

#include "cyllevy/driver.hpp"
#include "cyllevy/linalg.hpp"
#include "cyllevy/rng.hpp"
#include "cyllevy/stats.hpp"

namespace cyllevy {

/// Dyadic levels 2..10.
std::vector<int> default_levels();

/// Monte-Carlo estimates of sum_i E theta(d_i) and sum_i E min(|d_i|^2, 1)
/// over the dyadic partitions of [s, t] at the requested levels, where d_i
/// are the Radonified increments. Every replica draws one path on the finest
/// partition and aggregates it to the coarser ones, so estimates at
/// different levels share randomness and `*_increments` (level j+1 minus
/// level j) have paired standard errors.
struct PartitionLimitSeries {
  std::vector<int> levels;
  std::vector<VectorEstimate> b;
  std::vector<ScalarEstimate> k;
  std::vector<VectorEstimate> b_increments;
  std::vector<ScalarEstimate> k_increments;
};

/// One series per phi, all computed from the same G-valued paths. Replica r
/// uses rng.split(r).
std::vector<PartitionLimitSeries> partition_limits(const Driver& driver,
                                                   const std::vector<HSMap>& phis, double s,
                                                   double t, const std::vector<int>& levels,
                                                   std::size_t mc_samples, const Stream& rng);

std::vector<VectorEstimate> partition_estimate_b(const Driver& driver, const HSMap& phi, double s,
                                                 double t, const std::vector<int>& levels,
                                                 std::size_t mc_samples, const Stream& rng);

std::vector<ScalarEstimate> partition_estimate_k(const Driver& driver, const HSMap& phi, double s,
                                                 double t, const std::vector<int>& levels,
                                                 std::size_t mc_samples, const Stream& rng);

}  // namespace cyllevy
