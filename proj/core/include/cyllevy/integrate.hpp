#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cyllevy/driver.hpp"
#include "cyllevy/linalg.hpp"
#include "cyllevy/modular.hpp"
#include "cyllevy/rng.hpp"
#include "cyllevy/stats.hpp"

namespace cyllevy {

/// Driver history visible at the left endpoint of interval i: the G-valued
/// increments and jump counts of intervals 0, ..., i - 1.
struct PathView {
  const Matrix& g_increments;     // d_G x intervals
  const std::vector<int>& jumps;  // per interval
  mutable Matrix prefix_cache = Matrix();  // filled by cumulative()

  /// <L(t_k) - L(t_0), e_coord>; prefix sums are computed once per view.
  [[nodiscard]] double cumulative(int coord, std::size_t k) const;
};

/// Event determined by the driver path up to a partition point.
struct Predicate {
  enum class Kind { kAlways, kCoordSign, kCoordAbove, kCumulativeAbove, kCumulativeUntil, kJumpsAtLeast };

  Kind kind = Kind::kAlways;
  int interval = 0;  // past interval read by kCoordSign, kCoordAbove, kJumpsAtLeast; end index of kCumulativeUntil
  int coord = 0;
  double threshold = 0.0;
  int count = 0;
  bool negate = false;

  static Predicate always();
  /// <L(t_{k+1}) - L(t_k), e_coord> > 0.
  static Predicate coord_sign(int interval, int coord);
  static Predicate coord_above(int interval, int coord, double threshold);
  /// <L(t_i) - L(t_0), e_coord> > threshold.
  static Predicate cumulative_above(int coord, double threshold);
  /// <L(t_k) - L(t_0), e_coord> > threshold for the fixed index k.
  static Predicate cumulative_until(int k, int coord, double threshold);
  static Predicate jumps_at_least(int interval, int count);

  [[nodiscard]] Predicate operator!() const;

  /// True when the predicate only reads intervals before `i`.
  [[nodiscard]] bool adapted_at(std::size_t i) const;
  [[nodiscard]] bool eval(const PathView& history, std::size_t i) const;
  [[nodiscard]] std::string describe() const;
};

/// Value selected when every predicate of the conjunction holds.
template <class Value>
struct Rule {
  std::vector<Predicate> when;
  Value value;
};

/// Finitely-valued adapted step process sum_i sum_k F_{i,k} 1_{A_{i,k}} 1_{(t_i, t_{i+1}]}.
/// Rules of one interval must be exhaustive and mutually exclusive; this is
/// checked on every evaluation.
template <class Value>
class AdaptedStep {
 public:
  AdaptedStep(Partition partition, std::vector<std::vector<Rule<Value>>> rules);

  static AdaptedStep deterministic(Partition partition, std::vector<Value> values);

  [[nodiscard]] const Partition& partition() const { return partition_; }
  [[nodiscard]] std::size_t intervals() const { return partition_.intervals(); }
  [[nodiscard]] const std::vector<Rule<Value>>& rules(std::size_t i) const { return rules_.at(i); }

  /// Index of the rule that holds on `history`; throws DomainError unless
  /// exactly one holds.
  [[nodiscard]] std::size_t select_index(std::size_t i, const PathView& history) const;
  [[nodiscard]] const Value& select(std::size_t i, const PathView& history) const {
    return rules_[i][select_index(i, history)].value;
  }

 private:
  Partition partition_;
  std::vector<std::vector<Rule<Value>>> rules_;
};

using StepProcess = AdaptedStep<HSMap>;
using ContractionStepProcess = AdaptedStep<Contraction>;

/// Deterministic step function as a step process (the value at 0 is dropped).
StepProcess to_process(const StepFunction& psi);

int dim_h(const StepProcess& psi);
int dim_g(const StepProcess& psi);

/// Rule-wise difference on a common partition: conjunctions of both rule sets.
StepProcess operator-(const StepProcess& a, const StepProcess& b);
StepProcess operator*(double s, const StepProcess& a);

/// sum_i Psi_i(history) g_i for one realised G-path.
Vector integrate_on_path(const StepProcess& psi, const Matrix& g_increments, const std::vector<int>& jumps);

/// Realisations of an H-valued random variable with the cached Ky Fan
/// functional E[min(|X|, 1)].
class EmpiricalLaw {
 public:
  EmpiricalLaw() = default;
  EmpiricalLaw(Matrix samples, std::uint64_t seed);

  [[nodiscard]] const Matrix& samples() const { return samples_; }
  [[nodiscard]] int dim() const { return static_cast<int>(samples_.rows()); }
  [[nodiscard]] std::size_t count() const { return static_cast<std::size_t>(samples_.cols()); }
  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  [[nodiscard]] const ScalarEstimate& ky_fan() const { return ky_fan_; }

 private:
  Matrix samples_;
  std::uint64_t seed_ = 0;
  ScalarEstimate ky_fan_;
};

inline constexpr std::size_t kMinReplicas = 100;

/// Replica r simulates the driver on psi's partition with rng.split(r).
EmpiricalLaw integrate_step_det(const StepFunction& psi, const Driver& driver, std::size_t n_mc,
                                const Stream& rng);
/// Same replica streams as integrate_step_det, so a process whose rules all
/// select fixed values reproduces it exactly.
EmpiricalLaw integrate_step_pred(const StepProcess& psi, const Driver& driver, std::size_t n_mc,
                                 const Stream& rng);

// ---- supremum over contraction integrands ------------------------------------

struct GammaSearchOptions {
  int budget = 64;                  // candidate evaluations
  std::size_t n_mc = 10000;         // replicas per evaluation
  std::size_t max_pieces = 64;      // Gamma is constant on at most this many pieces
  std::optional<Partition> pieces;  // explicit Gamma partition, refined by psi's
};

struct GammaTrial {
  std::string label;
  double value = 0.0;
  double std_error = 0.0;
};

struct SupGammaResult {
  ScalarEstimate value;     // best candidate on independent replicas
  ScalarEstimate identity;  // Gamma = identity on the same independent replicas
  double search_value = 0.0;
  std::vector<GammaTrial> trace;
  ContractionStepProcess best;
};

/// Budgeted lower bound for sup_Gamma E[min(|int Gamma Psi dL|, 1)] over
/// contraction step processes. Candidates: the identity, random draws
/// (deterministic and sign-adapted contractions per piece), then a greedy
/// pass that re-chooses each piece among +-I, +-R and sign-adapted +-I,
/// where R = rotation_align(mean piece integral, mean of the rest). All
/// candidates share the search replicas; the winner is re-estimated on an
/// independent replica set.
SupGammaResult sup_gamma_ky_fan(const StepProcess& psi, const Driver& driver, const GammaSearchOptions& options,
                                const Stream& rng);
SupGammaResult sup_gamma_ky_fan(const StepFunction& psi, const Driver& driver,
                                const GammaSearchOptions& options, const Stream& rng);

/// For each element, max over the sup_gamma_ky_fan candidate family of
/// E[max_{t in grid} min(|int_0^t Gamma Psi dL|, 1)]. The Gamma pieces must
/// refine `grid`; with a fixed family the value is monotone in the grid.
std::vector<ScalarEstimate> emery_sup_diagnostic(const std::vector<StepProcess>& sequence, const Driver& driver,
                                                 const Partition& grid, const GammaSearchOptions& options,
                                                 const Stream& rng);

/// q-quantile of |int Gamma Psi dL| for Gamma_0 = identity and random
/// contraction step processes Gamma_k drawn from rng.split(k). All members
/// share the replicas, so a family is a prefix of any larger one.
std::vector<double> gamma_family_quantiles(const StepProcess& psi, const Driver& driver, std::size_t members,
                                           double q, const GammaSearchOptions& options, const Stream& rng);

/// E[min(m_L(Psi(omega)), 1)] where Psi(omega) is the step function selected
/// along one driver path.
ScalarEstimate randomized_modular(const StepProcess& psi, const Driver& driver, std::size_t paths, int l_budget,
                                  const Stream& rng);

// ---- general integrands -------------------------------------------------------

struct GeneralOptions {
  double tolerance = 0.02;
  int max_level = 10;
  int l_budget = 64;
  std::size_t law_samples = 10000;
  GammaSearchOptions gamma{16, 4000, 64, std::nullopt};
};

struct GeneralIntegral {
  bool integrable = false;
  int level = 0;
  EmpiricalLaw law;                      // integral of the finest member built
  std::vector<ScalarEstimate> cauchy;    // sup-Gamma Ky Fan of psi_{j+1} - psi_j
  std::vector<double> modular_increments;  // m_L(psi_{j+1} - psi_j)
};

/// Integral of t -> sampler(t) on [0, horizon] along the truncated_step
/// sequence psi_j. Integrable once the Cauchy value drops below the
/// tolerance; otherwise the verdict is negative after max_level with the
/// modular increments as diagnostic.
GeneralIntegral integrate_general(const Sampler& sampler, double horizon, const Driver& driver,
                                  const GeneralOptions& options, const Stream& rng);

// ---- decoupled tangent sequences ---------------------------------------------

struct TangentPair {
  std::vector<Matrix> x_terms;  // per term: d_H x replicas
  std::vector<Matrix> y_terms;
  Matrix x_sum;
  Matrix y_sum;
  std::vector<std::vector<int>> jumps;  // per term: jump counts of the original driver

  [[nodiscard]] std::size_t terms() const { return x_terms.size(); }
  [[nodiscard]] std::size_t replicas() const { return static_cast<std::size_t>(x_sum.cols()); }
};

/// X_n = Theta_n (L(t_n) - L(t_{n-1})) and Y_n = Theta_n (L'(t_n) - L'(t_{n-1}))
/// with the adapted coefficients Theta_n read from the original path and L'
/// an independent copy driven by rng_prime. Throws DomainError when the two
/// streams coincide.
TangentPair tangent_pair(const StepProcess& psi, const Driver& driver, std::size_t n_mc, const Stream& rng,
                         const Stream& rng_prime);

struct DecouplingRatio {
  ScalarEstimate forward;   // kyfan(sum X) / kyfan(sum Y)
  ScalarEstimate backward;  // kyfan(sum Y) / max_eps kyfan(sum eps_n X_n)
  int sign_patterns = 0;
  bool reliable = false;    // both denominators exceed 3 standard errors
};

/// Sign patterns are enumerated when 2^N <= sign_budget and drawn from rng
/// otherwise.
DecouplingRatio decoupling_ratio(const TangentPair& pair, int sign_budget, const Stream& rng);

}  // namespace cyllevy
