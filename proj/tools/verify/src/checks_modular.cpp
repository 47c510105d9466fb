#include <algorithm>
#include <cmath>
#include <limits>

#include <cyllevy/characteristics.hpp>
#include <cyllevy/modular.hpp>
#include <cyllevy/parallel.hpp>

#include "common.hpp"
#include "verify/checks.hpp"

namespace cyllevy::verify {

using detail::num;

namespace {

int random_intervals(Stream& rng, int max) { return 1 + static_cast<int>(rng.uniform() * max); }

// Step function whose values all share the singular-value profile `s`
// (unit HS norm), with random orientations, scales and break points.
StepFunction profile_step(Stream& rng, int d, const Vector& s) {
  const int intervals = random_intervals(rng, 4);
  std::vector<double> points{0.0, 1.0};
  while (static_cast<int>(points.size()) < intervals + 1) points.push_back(rng.uniform());
  std::sort(points.begin(), points.end());
  std::vector<HSMap> values;
  for (int i = 0; i <= intervals; ++i) {
    const double scale = 0.2 * std::pow(25.0, rng.uniform());
    values.push_back(hsmap_with_singular_values(rng, d, d, scale * s));
  }
  return StepFunction(Partition(std::move(points)), std::move(values));
}

// Profile j of the battery: rank 1 + (j mod d), equal singular values on
// even rounds and exponential weights on odd rounds.
Vector profile(Stream& rng, int d, std::size_t j) {
  const int rank = 1 + static_cast<int>(j % static_cast<std::size_t>(d));
  const bool equal = (j / static_cast<std::size_t>(d)) % 2 == 0;
  Vector s = Vector::Zero(d);
  for (int k = 0; k < rank; ++k) s[k] = equal ? 1.0 : std::sqrt(rng.exponential());
  return s / s.norm();
}

struct RatioRange {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  std::vector<double> ratios;
};

RatioRange stable_ratios(const Driver& driver, double alpha, int d, std::size_t count, int budget, const Stream& rng) {
  RatioRange r;
  r.ratios.resize(count);
  parallel_for(count, [&](std::size_t j) {
    Stream local = rng.split(j);
    const StepFunction psi = profile_step(local, d, profile(local, d, j));
    const ModularValue m = modular_of(driver, psi, budget, rng.split(count + j));
    double lebesgue = 0.0;
    for (std::size_t i = 0; i < psi.partition().intervals(); ++i)
      lebesgue += psi.partition().length(i) * std::pow(psi.values()[i + 1].hs_norm(), alpha);
    r.ratios[j] = m.m_prime / lebesgue;
  });
  for (double x : r.ratios) {
    r.lo = std::min(r.lo, x);
    r.hi = std::max(r.hi, x);
  }
  return r;
}

}  // namespace

CheckResult modular_growth(const ExperimentConfig& c, const Stream& rng) {
  CheckResult out;
  const int d = c.dim;
  Stream setup = rng.split(0);
  const auto drivers = detail::drivers_or(c, all_driver_kinds(setup, d));
  const std::size_t pairs = detail::battery_size(c, 200);
  Table table{"pairs", {"driver", "pair", "m1", "m2", "m12", "ratio"}, {}};
  for (std::size_t k = 0; k < drivers.size(); ++k) {
    const Driver& driver = drivers[k].driver;
    const Stream base = rng.split(1 + k);
    std::vector<std::array<double, 4>> rows(pairs);
    parallel_for(pairs, [&](std::size_t j) {
      Stream local = base.split(j);
      const StepFunction a = random_step(local, d, d, random_intervals(local, 4), 0.1, 10.0);
      const StepFunction b = random_step(local, d, d, random_intervals(local, 4), 0.1, 10.0);
      const Stream l_rng = base.split(pairs + j);
      const ModularValue ma = modular_of(driver, a, c.budgets.l_search, l_rng.split(0));
      const ModularValue mb = modular_of(driver, b, c.budgets.l_search, l_rng.split(1));
      const ModularValue mab = modular_of(driver, a + b, c.budgets.l_search, l_rng.split(2));
      const double slack = 3.0 * std::hypot(ma.std_error, mb.std_error, mab.std_error);
      rows[j] = {ma.total, mb.total, mab.total, mab.total - 4.0 * (ma.total + mb.total) - slack};
    });
    int violations = 0;
    double worst = 0.0;
    for (std::size_t j = 0; j < pairs; ++j) {
      const auto& r = rows[j];
      if (r[3] > 0.0) ++violations;
      const double ratio = r[2] / (r[0] + r[1]);
      worst = std::max(worst, ratio);
      table.add({drivers[k].name, std::to_string(j), num(r[0]), num(r[1]), num(r[2]), num(ratio)});
    }
    out.add(at_most(drivers[k].name + "/violations of m(a+b) <= 4(m(a)+m(b))", violations, 0.0));
    out.record(drivers[k].name + "/max m(a+b)/(m(a)+m(b))", worst);
  }
  out.tables.push_back(std::move(table));
  return out;
}

CheckResult metrization_sandwich(const ExperimentConfig& c, const Stream& rng) {
  CheckResult out;
  const int d = c.dim;
  Stream setup = rng.split(0);
  const auto drivers = detail::drivers_or(
      c, {{"compound-poisson", compound_poisson_driver(setup, d)}, {"canonical-stable", canonical_stable_driver(d, 1.5)}});
  const std::size_t sets = detail::battery_size(c, 20);
  const MetrizationParams params = MetrizationParams::standard();
  for (std::size_t k = 0; k < drivers.size(); ++k) {
    const Stream base = rng.split(1 + k);
    std::vector<Metrization> results(sets);
    parallel_for(sets, [&](std::size_t j) {
      Stream local = base.split(j);
      std::vector<StepFunction> values;
      for (int i = 0; i < 6; ++i) values.push_back(random_step(local, d, d, random_intervals(local, 3), 0.1, 3.0));
      results[j] = metrize(values, drivers[k].driver, params, c.budgets.l_search, base.split(sets + j));
    });
    int broken = 0;
    double worst = 0.0;
    for (const auto& m : results) {
      if (!m.sandwich_holds) ++broken;
      worst = std::max(worst, m.worst_ratio);
    }
    out.add(at_most(drivers[k].name + "/sets violating d <= m^p <= 2d", broken, 0.0));
    out.add(at_most(drivers[k].name + "/max m^p / d", worst, 2.0));
  }
  out.record("p", params.p);
  return out;
}

CheckResult stable_equivalence(const ExperimentConfig& c, const Stream& rng) {
  CheckResult out;
  const int d = c.dim;
  std::vector<double> alphas{0.8, 1.2, 1.5};
  if (c.driver) {
    if (c.driver->kind() != DriverKind::kCanonicalStable)
      throw FormatError("stable-equivalence needs a canonical-stable driver");
    alphas = {std::get<CanonicalStableLevy>(c.driver->chars().levy()).alpha};
  }
  const std::size_t count = detail::battery_size(c, 50);
  Table table{"ratios", {"alpha", "draw", "function", "ratio"}, {}};
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    const double alpha = alphas[k];
    const Driver driver = canonical_stable_driver(d, alpha);
    const RatioRange first = stable_ratios(driver, alpha, d, count, c.budgets.l_search, rng.split(2 * k));
    const RatioRange second = stable_ratios(driver, alpha, d, count, c.budgets.l_search, rng.split(2 * k + 1));
    const std::string tag = "alpha=" + num(alpha);
    const double w1 = first.hi - first.lo;
    const double w2 = second.hi - second.lo;
    const double change = std::abs(w2 - w1) / std::max(w1, 1e-12 * first.hi);
    out.add(at_least(tag + "/lower constant 1/c", first.lo, std::numeric_limits<double>::min()));
    out.add(at_most(tag + "/relative width change on redraw", change, 0.10));
    out.record(tag + "/1/c", first.lo);
    out.record(tag + "/d", first.hi);
    out.record(tag + "/1/c redrawn", second.lo);
    out.record(tag + "/d redrawn", second.hi);
    for (std::size_t j = 0; j < count; ++j) {
      table.add({num(alpha), "0", std::to_string(j), num(first.ratios[j])});
      table.add({num(alpha), "1", std::to_string(j), num(second.ratios[j])});
    }
  }
  out.tables.push_back(std::move(table));
  return out;
}

CheckResult supremum_equivalency(const ExperimentConfig& c, const Stream& rng) {
  CheckResult out;
  const int d = c.dim;
  Stream setup = rng.split(0);
  const Driver cp = compound_poisson_driver(setup, d);
  const auto drivers =
      detail::drivers_or(c, {{"compound-poisson", cp}, {"sum", Driver::sum({gaussian_driver(setup, d), cp})}});
  const std::size_t count = detail::battery_size(c, 50);
  Table table{"battery", {"driver", "function", "lhs_lower", "lhs_upper", "aligned", "best_random"}, {}};
  for (std::size_t k = 0; k < drivers.size(); ++k) {
    const Driver& driver = drivers[k].driver;
    const Stream base = rng.split(1 + k);
    std::vector<std::array<double, 4>> rows(count);
    parallel_for(count, [&](std::size_t j) {
      Stream local = base.split(j);
      const StepFunction psi = random_step(local, d, d, random_intervals(local, 5), 0.3, 3.0);
      const std::size_t n = psi.partition().intervals();
      std::vector<GenuineTriplet> triplets;
      std::vector<Contraction> best;
      std::vector<Vector> b;
      double lower = 0.0;
      double upper = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        triplets.push_back(driver.triplet(psi.values()[i + 1]));
        const LBounds l = l_of(triplets.back(), c.budgets.l_search, base.split(count + j).split(i));
        const double dt = psi.partition().length(i);
        best.push_back(l.argmax);
        b.push_back(compose_contraction(triplets.back(), l.argmax).b.coords());
        lower += dt * b.back().norm();
        upper += dt * l.upper;
      }
      // Rotate every optimal drift onto one direction.
      const HVec e(detail::unit(d, 0), Space::kH);
      Vector aligned = Vector::Zero(d);
      for (std::size_t i = 0; i < n; ++i) {
        const Contraction r = rotation_align(HVec(b[i], Space::kH), e);
        const Contraction gamma(r.matrix() * best[i].matrix());
        aligned += psi.partition().length(i) * compose_contraction(triplets[i], gamma).b.coords();
      }
      double best_random = 0.0;
      for (int trial = 0; trial < 32; ++trial) {
        Vector sum = Vector::Zero(d);
        for (std::size_t i = 0; i < n; ++i) {
          const Contraction g = sample_contraction(local, static_cast<ContractionMode>(trial % 3), d);
          sum += psi.partition().length(i) * compose_contraction(triplets[i], g).b.coords();
        }
        best_random = std::max(best_random, sum.norm());
      }
      rows[j] = {lower, upper, aligned.norm(), best_random};
    });
    double worst_gap = 0.0;
    double worst_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < count; ++j) {
      const auto& r = rows[j];
      worst_gap = std::max(worst_gap, std::abs(r[2] - r[0]) / std::max(1.0, r[0]));
      worst_excess = std::max(worst_excess, std::max(r[2], r[3]) - r[1]);
      table.add({drivers[k].name, std::to_string(j), num(r[0]), num(r[1]), num(r[2]), num(r[3])});
    }
    out.add(at_most(drivers[k].name + "/|aligned gamma - int sup_O| (relative)", worst_gap, 1e-9));
    out.add(at_most(drivers[k].name + "/max searched gamma above int upper bound", worst_excess, 1e-12));
  }
  out.tables.push_back(std::move(table));
  return out;
}

}  // namespace cyllevy::verify
