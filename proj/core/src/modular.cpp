#include "cyllevy/modular.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cyllevy/error.hpp"

namespace cyllevy {

// ---- StepFunction ---------------------------------------------------------

StepFunction::StepFunction(Partition partition, std::vector<HSMap> values)
    : partition_(std::move(partition)), values_(std::move(values)) {
  if (values_.size() != partition_.intervals() + 1)
    throw DimensionError("StepFunction: need one value per interval plus the initial value");
  for (const HSMap& v : values_)
    if (v.dim_h() != values_.front().dim_h() || v.dim_g() != values_.front().dim_g())
      throw DimensionError("StepFunction: values differ in shape");
}

StepFunction StepFunction::constant(Partition partition, const HSMap& value) {
  std::vector<HSMap> values(partition.intervals() + 1, value);
  return StepFunction(std::move(partition), std::move(values));
}

const HSMap& StepFunction::at(double t) const {
  if (t <= partition_.start()) return values_.front();
  return values_[partition_.locate(t) + 1];
}

StepFunction StepFunction::refine(const Partition& finer) const {
  if (!finer.refines(partition_)) throw DomainError("StepFunction::refine: not a refinement");
  std::vector<HSMap> values{values_.front()};
  const auto& pts = finer.points();
  for (std::size_t i = 0; i < finer.intervals(); ++i)
    values.push_back(values_[partition_.locate(0.5 * (pts[i] + pts[i + 1])) + 1]);
  return StepFunction(finer, std::move(values));
}

namespace {

template <class Op>
StepFunction combine(const StepFunction& a, const StepFunction& b, Op op) {
  const Partition merged = Partition::merge(a.partition(), b.partition());
  const StepFunction ra = a.refine(merged);
  const StepFunction rb = b.refine(merged);
  std::vector<HSMap> values;
  values.reserve(ra.values().size());
  for (std::size_t i = 0; i < ra.values().size(); ++i) values.push_back(op(ra.values()[i], rb.values()[i]));
  return StepFunction(merged, std::move(values));
}

}  // namespace

StepFunction operator+(const StepFunction& a, const StepFunction& b) {
  return combine(a, b, [](const HSMap& x, const HSMap& y) { return x + y; });
}

StepFunction operator-(const StepFunction& a, const StepFunction& b) {
  return combine(a, b, [](const HSMap& x, const HSMap& y) { return x - y; });
}

StepFunction operator*(double s, const StepFunction& a) {
  std::vector<HSMap> values;
  for (const HSMap& v : a.values_) values.push_back(s * v);
  return StepFunction(a.partition_, std::move(values));
}

MetrizationParams MetrizationParams::standard() {
  return {std::log(2.0) / std::log(8.0), 4.0};
}

// ---- k and l ----------------------------------------------------------------

double k_of(const GenuineTriplet& triplet) { return triplet.q_h.trace() + jump_energy(triplet); }

double k_of(const Driver& driver, const HSMap& phi) {
  if (phi.is_zero()) return 0.0;
  return k_of(driver.triplet(phi));
}

namespace {

struct SvdParams {
  Matrix u;
  Vector s;
  Matrix v;

  [[nodiscard]] Matrix matrix() const { return u * s.asDiagonal() * v.transpose(); }
};

SvdParams svd_params(const Matrix& o) {
  Eigen::JacobiSVD<Matrix> svd(o, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return {svd.matrixU(), svd.singularValues().cwiseMin(1.0), svd.matrixV()};
}

void rotate(Matrix& m, Eigen::Index i, Eigen::Index j, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const Vector ci = m.col(i);
  const Vector cj = m.col(j);
  m.col(i) = c * ci - s * cj;
  m.col(j) = s * ci + c * cj;
}

class LSearch {
 public:
  LSearch(const GenuineTriplet& triplet, int budget) : triplet_(triplet), budget_(budget) {}

  [[nodiscard]] bool exhausted() const { return used_ >= budget_; }

  // max(|b_{O phi}|, |b_{-O phi}|); the negation is tracked so the argmax is
  // an actual maximiser.
  double score(const Matrix& o, bool* negate = nullptr) {
    ++used_;
    const Contraction c(o);
    const double plus = compose_contraction(triplet_, c).b.norm();
    const double minus = compose_contraction(triplet_, Contraction(-o)).b.norm();
    if (negate != nullptr) *negate = minus > plus;
    return std::max(plus, minus);
  }

  void offer(const Matrix& o) {
    bool negate = false;
    const double v = score(o, &negate);
    if (v > best_value_) {
      best_value_ = v;
      best_ = negate ? Matrix(-o) : o;
    }
  }

  [[nodiscard]] double best_value() const { return best_value_; }
  [[nodiscard]] const Matrix& best() const { return best_; }

 private:
  const GenuineTriplet& triplet_;
  int budget_;
  int used_ = 0;
  double best_value_ = -1.0;
  Matrix best_;
};

}  // namespace

LBounds l_of(const GenuineTriplet& triplet, int budget, const Stream& rng) {
  if (budget < 1) throw DomainError("l_of: budget must be at least 1");
  const int d = triplet.dim_h();
  const Contraction identity = Contraction::identity(d);
  const double upper = triplet.b_theta.norm() + 2.0 * tail_mass(triplet);
  if (is_symmetric(triplet)) return {0.0, 0.0, identity};

  Stream stream = rng;
  LSearch search(triplet, budget);
  search.offer(Matrix::Identity(d, d));
  const int starts = budget / 4;
  for (int i = 0; i < starts && !search.exhausted(); ++i)
    search.offer(sample_contraction(stream, static_cast<ContractionMode>(i % 3), d).matrix());

  // Stochastic coordinate ascent on (U, s, V).
  SvdParams current = svd_params(search.best());
  double value = search.best_value();
  double step = 0.25;
  int failures = 0;
  const int moves = d + d * (d - 1);
  while (!search.exhausted() && step > 1e-4) {
    SvdParams trial = current;
    const auto pick = static_cast<int>(stream() % static_cast<std::uint64_t>(std::max(1, moves)));
    const double sign = stream.uniform() < 0.5 ? -1.0 : 1.0;
    if (pick < d) {
      trial.s[pick] = std::clamp(trial.s[pick] + sign * step, 0.0, 1.0);
    } else if (d > 1) {
      const int r = pick - d;
      const int pair = r / 2;
      int i = 0;
      int rest = pair;
      while (rest >= d - 1 - i) {
        rest -= d - 1 - i;
        ++i;
      }
      const int j = i + 1 + rest;
      rotate(r % 2 == 0 ? trial.u : trial.v, i, j, sign * step * std::numbers::pi / 2.0);
    }
    const Matrix o = trial.matrix();
    bool negate = false;
    const double v = search.score(o, &negate);
    if (v > value) {
      value = v;
      current = trial;
      if (negate) current.u = -current.u;
      search.offer(current.matrix());
      failures = 0;
    } else if (++failures >= 2 * moves) {
      step /= 2.0;
      failures = 0;
    }
  }
  return {std::max(search.best_value(), 0.0), upper, Contraction(search.best())};
}

LBounds l_of(const Driver& driver, const HSMap& phi, int budget, const Stream& rng) {
  if (budget < 1) throw DomainError("l_of: budget must be at least 1");
  if (phi.is_zero()) return {0.0, 0.0, Contraction::identity(phi.dim_h())};
  return l_of(driver.triplet(phi), budget, rng);
}

// ---- modular ------------------------------------------------------------------

ModularValue modular_of(const Driver& driver, const StepFunction& psi, int budget, const Stream& rng) {
  if (psi.dim_g() != driver.dim_g()) throw DimensionError("modular_of: integrand does not act on G");
  ModularValue out;
  for (std::size_t i = 0; i < psi.intervals(); ++i) {
    const HSMap& f = psi.on_interval(i);
    const double dt = psi.partition().length(i);
    if (f.is_zero()) continue;
    const GenuineTriplet t = driver.triplet(f);
    const LBounds l = l_of(t, budget, rng.split(i));
    out.m_prime += dt * (k_of(t) + l.lower);
    out.l_gap += dt * (l.upper - l.lower);
    out.m_double_prime += dt * std::min(f.hs_norm() * f.hs_norm(), 1.0);
  }
  out.total = out.m_prime + out.m_double_prime;
  if (!std::isfinite(out.total)) throw DomainError("modular_of: non-finite modular value");
  return out;
}

double quasi_metric(const Driver& driver, const StepFunction& psi1, const StepFunction& psi2, int budget,
                    const Stream& rng) {
  if (psi1.dim_h() != psi2.dim_h() || psi1.dim_g() != psi2.dim_g())
    throw DimensionError("quasi_metric: integrands differ in shape");
  return modular_of(driver, psi1 - psi2, budget, rng).total;
}

Metrization metrize(const std::vector<StepFunction>& values, const Driver& driver,
                    const MetrizationParams& params, int budget, const Stream& rng) {
  if (values.empty()) throw DomainError("metrize: empty list");
  if (!(params.p > 0.0 && params.p < 1.0)) throw DomainError("metrize: p must lie in (0, 1)");
  const auto n = static_cast<Eigen::Index>(values.size());
  Metrization out{Matrix::Zero(n, n), Matrix::Zero(n, n), true, 0.0};
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double m = quasi_metric(driver, values[static_cast<std::size_t>(i)],
                                    values[static_cast<std::size_t>(j)], budget, rng);
      out.m_power(i, j) = out.m_power(j, i) = std::pow(m, params.p);
    }
  out.distance = out.m_power;
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        out.distance(i, j) = std::min(out.distance(i, j), out.distance(i, k) + out.distance(k, j));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = out.distance(i, j);
      const double m = out.m_power(i, j);
      const double slack = 1e-12 * std::max(1.0, m);
      if (d > m + slack || m > 2.0 * d + slack) out.sandwich_holds = false;
      if (d > 0.0) out.worst_ratio = std::max(out.worst_ratio, m / d);
    }
  return out;
}

// ---- step approximation -----------------------------------------------------

namespace {

struct Truncated {
  StepFunction psi;
  double cut_measure;  // Lebesgue measure of the intervals zeroed by truncation
};

Truncated truncate_and_sample(const Sampler& sampler, double horizon, int level, double truncation) {
  const Partition p = Partition::dyadic(0.0, horizon, level);
  double cut_measure = 0.0;
  auto cut = [truncation](const HSMap& f) {
    return !f.matrix().allFinite() || f.hs_norm() > truncation;
  };
  const auto& pts = p.points();
  std::vector<HSMap> values;
  values.reserve(p.intervals() + 1);
  for (std::size_t i = 0; i < p.intervals(); ++i) {
    HSMap f = sampler(0.5 * (pts[i] + pts[i + 1]));
    if (cut(f)) {
      cut_measure += pts[i + 1] - pts[i];
      f = HSMap::zero(f.dim_h(), f.dim_g());
    }
    if (i == 0) values.push_back(HSMap::zero(f.dim_h(), f.dim_g()));
    values.push_back(std::move(f));
  }
  // F_0 is Lebesgue-null; take the sampled value at 0 when it is finite.
  try {
    const HSMap at0 = sampler(0.0);
    if (!cut(at0)) values.front() = at0;
  } catch (const std::exception&) {
  }
  return {StepFunction(p, std::move(values)), cut_measure};
}

}  // namespace

StepFunction truncated_step(const Sampler& sampler, double horizon, int level, double truncation) {
  return truncate_and_sample(sampler, horizon, level, truncation).psi;
}

StepApproximation step_approximate(const Sampler& sampler, double horizon, const Driver& driver,
                                   double tolerance, int budget, const Stream& rng) {
  if (!(horizon > 0.0)) throw DomainError("step_approximate: horizon must be positive");
  if (!(tolerance > 0.0)) throw DomainError("step_approximate: tolerance must be positive");
  constexpr int kMaxLevel = 16;
  std::vector<double> increments;
  Truncated current = truncate_and_sample(sampler, horizon, 0, 1.0);
  for (int level = 0; level < kMaxLevel; ++level) {
    Truncated next = truncate_and_sample(sampler, horizon, level + 1, std::ldexp(1.0, level + 1));
    const double inc =
        quasi_metric(driver, current.psi, next.psi, budget, rng.split(static_cast<std::uint64_t>(level)));
    increments.push_back(inc);
    if (inc < tolerance && next.cut_measure < tolerance)
      return {current.psi, level, std::ldexp(1.0, level), increments};
    current = std::move(next);
  }
  throw NonConvergenceError("step_approximate: no convergence within 2^16 intervals");
}

}  // namespace cyllevy
