#pragma once

#include <functional>
#include <vector>

#include "cyllevy/characteristics.hpp"
#include "cyllevy/driver.hpp"
#include "cyllevy/linalg.hpp"
#include "cyllevy/rng.hpp"

namespace cyllevy {

/// Deterministic step function F_0 1_{0} + sum_i F_i 1_{(t_i, t_{i+1}]}.
/// values[0] is F_0 and values[i + 1] the value on interval i.
class StepFunction {
 public:
  StepFunction(Partition partition, std::vector<HSMap> values);

  /// Constant value on every interval, including the initial point.
  static StepFunction constant(Partition partition, const HSMap& value);

  [[nodiscard]] const Partition& partition() const { return partition_; }
  [[nodiscard]] const std::vector<HSMap>& values() const { return values_; }
  [[nodiscard]] const HSMap& initial() const { return values_.front(); }
  [[nodiscard]] const HSMap& on_interval(std::size_t i) const { return values_.at(i + 1); }
  [[nodiscard]] std::size_t intervals() const { return partition_.intervals(); }
  [[nodiscard]] int dim_h() const { return values_.front().dim_h(); }
  [[nodiscard]] int dim_g() const { return values_.front().dim_g(); }

  /// Value at time t (F_0 at the left endpoint).
  [[nodiscard]] const HSMap& at(double t) const;

  /// Same function on a finer partition.
  [[nodiscard]] StepFunction refine(const Partition& finer) const;

  /// Value-wise combination on the merged partition.
  friend StepFunction operator+(const StepFunction& a, const StepFunction& b);
  friend StepFunction operator-(const StepFunction& a, const StepFunction& b);
  friend StepFunction operator*(double s, const StepFunction& a);

 private:
  Partition partition_;
  std::vector<HSMap> values_;
};

struct ModularValue {
  double m_prime = 0.0;         // int (k_L + l_L) dt, l_L taken at its lower bound
  double m_double_prime = 0.0;  // int min(|psi|_HS^2, 1) dt
  double total = 0.0;
  double std_error = 0.0;       // statistical error of the l_L estimate
  double l_gap = 0.0;           // int (upper - lower bound of l_L) dt
};

struct MetrizationParams {
  double p = 1.0 / 3.0;  // ln 2 / ln(2 K)
  double quasi_constant = 4.0;

  static MetrizationParams standard();
};

/// k_L(phi) = Tr(phi Q phi^T) + int min(|h|^2, 1) d(lambda o phi^{-1}).
double k_of(const Driver& driver, const HSMap& phi);
double k_of(const GenuineTriplet& triplet);

struct LBounds {
  double lower = 0.0;
  double upper = 0.0;
  Contraction argmax = Contraction::identity(1);
};

/// Budgeted lower bound for l_L(phi) = sup_{|O| <= 1} |b^theta_{O phi}| and
/// the upper bound |b^theta_phi| + 2 lambda_H(|h| > 1). The search evaluates
/// the identity, random contractions of every mode and then runs a
/// coordinate ascent on scaled-SVD parameters from the best start; each
/// candidate is scored together with its negation, so l_of(-phi) equals
/// l_of(phi) for the same stream. Symmetric triplets return (0, 0).
LBounds l_of(const GenuineTriplet& triplet, int budget, const Stream& rng);
LBounds l_of(const Driver& driver, const HSMap& phi, int budget, const Stream& rng);

/// Interval i uses l_of with rng.split(i).
ModularValue modular_of(const Driver& driver, const StepFunction& psi, int budget, const Stream& rng);

/// m_L(psi1 - psi2) on the merged partition.
double quasi_metric(const Driver& driver, const StepFunction& psi1, const StepFunction& psi2,
                    int budget, const Stream& rng);

struct Metrization {
  Matrix m_power;   // m_L(psi_i - psi_j)^p
  Matrix distance;  // chain infimum of m_power
  bool sandwich_holds = false;
  double worst_ratio = 0.0;  // max m^p / d over pairs with d > 0
};

/// Chain-infimum metric over a finite list (Floyd-Warshall on m^p) and the
/// check d <= m^p <= 2 d on all pairs.
Metrization metrize(const std::vector<StepFunction>& values, const Driver& driver,
                    const MetrizationParams& params, int budget, const Stream& rng);

struct StepApproximation {
  StepFunction psi;
  int level = 0;                   // dyadic level of psi
  double truncation = 0.0;         // values with |psi(t)|_HS above this are zeroed
  std::vector<double> increments;  // quasi_metric between successive levels
};

using Sampler = std::function<HSMap(double)>;

/// Truncate at level 2^j and sample at interval midpoints on 2^j dyadic
/// intervals of [0, horizon], for j = 0, 1, ...; stops at the first j with
/// quasi_metric(psi_j, psi_{j+1}) < tolerance whose successor zeroes a set of
/// measure below tolerance, and returns psi_j. Throws
/// NonConvergenceError when 2^16 intervals are reached.
StepApproximation step_approximate(const Sampler& sampler, double horizon, const Driver& driver,
                                   double tolerance, int budget, const Stream& rng);

/// The j-th member of the step_approximate sequence.
StepFunction truncated_step(const Sampler& sampler, double horizon, int level, double truncation);

}  // namespace cyllevy
