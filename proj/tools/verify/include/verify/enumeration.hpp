#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <vector>

#include <cyllevy/linalg.hpp>

namespace cyllevy::verify {

/// Exact law of a functional of a compound-Poisson path over a few intervals,
/// by enumerating Poisson counts up to `max_count` per atom and interval.
/// Each interval increment is dt (a - sum_{|h| <= 1} r h) + sum_k n_k h_k.
struct DiscreteLaw {
  std::vector<Vector> points;
  std::vector<double> probs;
  double missing = 0.0;  // mass of the truncated counts
};

struct CountPath {
  Matrix increments;                    // d_G x intervals
  std::vector<int> jumps;               // total jumps per interval
};

inline double poisson_pmf(int n, double mean) { return std::exp(-mean + n * std::log(mean) - std::lgamma(n + 1.0)); }

inline DiscreteLaw enumerate_law(const std::vector<Vector>& atoms, const std::vector<double>& rates, const Vector& a,
                                 const std::vector<double>& dts, int max_count,
                                 const std::function<Vector(const CountPath&)>& functional) {
  const std::size_t k = atoms.size();
  const std::size_t slots = k * dts.size();
  Vector drift = a;
  for (std::size_t j = 0; j < k; ++j)
    if (atoms[j].norm() <= 1.0) drift -= rates[j] * atoms[j];
  DiscreteLaw law;
  std::vector<int> counts(slots, 0);
  double total = 0.0;
  while (true) {
    CountPath path{Matrix::Zero(a.size(), static_cast<Eigen::Index>(dts.size())), std::vector<int>(dts.size(), 0)};
    double p = 1.0;
    for (std::size_t i = 0; i < dts.size(); ++i) {
      Vector inc = dts[i] * drift;
      for (std::size_t j = 0; j < k; ++j) {
        const int n = counts[i * k + j];
        inc += n * atoms[j];
        path.jumps[i] += n;
        p *= poisson_pmf(n, rates[j] * dts[i]);
      }
      path.increments.col(static_cast<Eigen::Index>(i)) = inc;
    }
    law.points.push_back(functional(path));
    law.probs.push_back(p);
    total += p;
    std::size_t s = 0;
    while (s < slots && ++counts[s] > max_count) counts[s++] = 0;
    if (s == slots) break;
  }
  law.missing = 1.0 - total;
  return law;
}

/// Total variation between the empirical law of the columns of `samples`
/// and `law`: each sample is assigned to the nearest support point within
/// `tol`, unmatched samples count fully, and the truncated mass is added.
inline double total_variation(const Matrix& samples, const DiscreteLaw& law, double tol = 1e-8) {
  std::map<std::size_t, double> empirical;
  double unmatched = 0.0;
  const double w = 1.0 / static_cast<double>(samples.cols());
  for (Eigen::Index c = 0; c < samples.cols(); ++c) {
    std::size_t best = law.points.size();
    double best_d = tol;
    for (std::size_t i = 0; i < law.points.size(); ++i) {
      const double d = (law.points[i] - samples.col(c)).norm();
      if (d <= best_d) {
        best_d = d;
        best = i;
      }
    }
    if (best == law.points.size()) {
      unmatched += w;
    } else {
      empirical[best] += w;
    }
  }
  // Merge coincident support points before comparing.
  std::vector<double> merged_p;
  std::vector<double> merged_e;
  std::vector<int> owner(law.points.size(), -1);
  for (std::size_t i = 0; i < law.points.size(); ++i) {
    if (owner[i] >= 0) continue;
    owner[i] = static_cast<int>(merged_p.size());
    merged_p.push_back(0.0);
    merged_e.push_back(0.0);
    for (std::size_t j = i + 1; j < law.points.size(); ++j)
      if (owner[j] < 0 && (law.points[i] - law.points[j]).norm() <= tol) owner[j] = owner[i];
  }
  for (std::size_t i = 0; i < law.points.size(); ++i) merged_p[static_cast<std::size_t>(owner[i])] += law.probs[i];
  for (const auto& [i, e] : empirical) merged_e[static_cast<std::size_t>(owner[i])] += e;
  double tv = unmatched + law.missing;
  for (std::size_t i = 0; i < merged_p.size(); ++i) tv += std::abs(merged_p[i] - merged_e[i]);
  return 0.5 * tv;
}

}  // namespace cyllevy::verify
