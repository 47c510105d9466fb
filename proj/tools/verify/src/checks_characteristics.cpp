#include <cmath>

#include <cyllevy/characteristics.hpp>
#include <cyllevy/limits.hpp>
#include <cyllevy/modular.hpp>
#include <cyllevy/parallel.hpp>
#include <cyllevy/stats.hpp>

#include "common.hpp"
#include "verify/checks.hpp"

namespace cyllevy::verify {

using detail::num;

namespace {

// Steps j = 1..8 where |D_j| <= |D_{j-1}| + 3 se_j, with D_0 the coarsest
// error and D_j the mesh-to-mesh increments.
int decreasing_steps(double first_error, const std::vector<double>& incs, const std::vector<double>& ses) {
  int count = 0;
  double prev = first_error;
  for (std::size_t j = 0; j < incs.size(); ++j) {
    if (incs[j] <= prev + 3.0 * ses[j]) ++count;
    prev = incs[j];
  }
  return count;
}

}  // namespace

CheckResult limit_characteristics(const ExperimentConfig& c, const Stream& rng) {
  CheckResult out;
  const int d = c.dim;
  Stream setup = rng.split(0);
  const auto drivers = detail::drivers_or(c, {{"gaussian", gaussian_driver(setup, d)},
                                              {"compound-poisson", compound_poisson_driver(setup, d)},
                                              {"canonical-stable-1.2", canonical_stable_driver(d, 1.2)}});
  const std::vector<int> levels = default_levels();
  const int steps = static_cast<int>(levels.size()) - 1;
  Table table{"series", {"driver", "phi", "level", "b_error", "b_se", "k", "k_se", "k_target"}, {}};
  for (std::size_t k = 0; k < drivers.size(); ++k) {
    const Driver& driver = drivers[k].driver;
    Stream phi_rng = rng.split(100 + k);
    std::vector<HSMap> phis;
    for (int j = 0; j < 3; ++j) phis.push_back(random_hsmap(phi_rng, d, d, 1.0));
    const auto series = partition_limits(driver, phis, 0.0, 1.0, levels, c.budgets.n_mc, rng.split(1 + k));
    for (std::size_t j = 0; j < phis.size(); ++j) {
      const auto& s = series[j];
      const GenuineTriplet t = driver.triplet(phis[j]);
      const Vector b_target = t.b_theta.coords();
      const double k_target = k_of(t);
      const std::string tag = drivers[k].name + "/phi" + std::to_string(j);
      const auto& bf = s.b.back();
      const auto& kf = s.k.back();
      out.add(at_most(tag + "/b final error", (bf.value - b_target).norm(), 3.0 * bf.norm_stderr(), bf.norm_stderr()));
      out.add(at_most(tag + "/k final error", std::abs(kf.value - k_target), 3.0 * kf.std_error, kf.std_error));

      std::vector<double> b_inc, b_se, k_inc, k_se;
      for (int i = 0; i < steps; ++i) {
        b_inc.push_back(s.b_increments[i].value.norm());
        b_se.push_back(s.b_increments[i].norm_stderr());
        k_inc.push_back(std::abs(s.k_increments[i].value));
        k_se.push_back(s.k_increments[i].std_error);
      }
      out.add(at_least(tag + "/b decreasing steps",
                       decreasing_steps((s.b.front().value - b_target).norm(), b_inc, b_se), steps - 1));
      out.add(at_least(tag + "/k decreasing steps",
                       decreasing_steps(std::abs(s.k.front().value - k_target), k_inc, k_se), steps - 1));
      for (std::size_t l = 0; l < levels.size(); ++l)
        table.add({drivers[k].name, std::to_string(j), std::to_string(levels[l]),
                   num((s.b[l].value - b_target).norm()), num(s.b[l].norm_stderr()), num(s.k[l].value),
                   num(s.k[l].std_error), num(k_target)});
    }
  }
  out.tables.push_back(std::move(table));
  return out;
}

CheckResult pushforward_consistency(const ExperimentConfig& c, const Stream& rng) {
  CheckResult out;
  const int d = c.dim;
  Stream setup = rng.split(0);
  const auto drivers = detail::drivers_or(c, all_driver_kinds(setup, d));
  const std::size_t n = 10 * c.budgets.n_mc;
  const double dt = 1.0;
  Table table{"ecf", {"driver", "u_norm", "re", "im", "target_re", "target_im", "se"}, {}};
  for (std::size_t k = 0; k < drivers.size(); ++k) {
    const Driver& driver = drivers[k].driver;
    Stream phi_rng = rng.split(100 + k);
    const HSMap phi = random_hsmap(phi_rng, d, d, 1.0);
    Matrix samples(d, static_cast<Eigen::Index>(n));
    const Stream draws = rng.split(1 + k);
    parallel_blocks(n, 1024, [&](std::size_t block, std::size_t begin, std::size_t end) {
      Stream s = draws.split(block);
      for (std::size_t r = begin; r < end; ++r)
        samples.col(static_cast<Eigen::Index>(r)) = sample_increment(driver, phi, dt, s).coords();
    });
    double worst = -1.0;
    for (int j = 0; j < 20; ++j) {
      const double radius = 0.2 * std::pow(15.0, j / 19.0);
      const Vector u = radius * random_unit_vector(phi_rng, d);
      const auto ecf = empirical_cf(samples, u);
      const std::complex<double> target = std::exp(dt * driver.symbol(phi.matrix().transpose() * u));
      const double err = std::abs(ecf.value - target);
      worst = std::max(worst, err / std::max(ecf.std_error, 1e-300));
      out.add(at_most(drivers[k].name + "/u" + std::to_string(j), err, 3.0 * ecf.std_error, ecf.std_error));
      table.add({drivers[k].name, num(radius), num(ecf.value.real()), num(ecf.value.imag()), num(target.real()),
                 num(target.imag()), num(ecf.std_error)});
    }
    out.record(drivers[k].name + "/max error in se", worst);
  }
  out.tables.push_back(std::move(table));
  return out;
}

CheckResult contraction_composition(const ExperimentConfig& c, const Stream& rng) {
  CheckResult out;
  const int d = c.dim;
  Stream setup = rng.split(0);
  const Driver driver = detail::require_kind(c, DriverKind::kCompoundPoisson, compound_poisson_driver(setup, d),
                                             "contraction-composition");
  const HSMap phi = random_hsmap(setup, d, d, 1.5);
  const GenuineTriplet t = driver.triplet(phi);
  std::vector<Contraction> os;
  std::vector<HSMap> mapped;
  for (int j = 0; j < 20; ++j) {
    os.push_back(sample_contraction(setup, static_cast<ContractionMode>(j % 3), d));
    mapped.push_back(os.back() * phi);
  }
  const auto series = partition_limits(driver, mapped, 0.0, 1.0, {10}, c.budgets.n_mc, rng.split(1));
  Table table{"composition", {"contraction", "closed_form_norm", "mc_norm", "error", "se"}, {}};
  for (int j = 0; j < 20; ++j) {
    const Vector closed = compose_contraction(t, os[static_cast<std::size_t>(j)]).b.coords();
    const auto& est = series[static_cast<std::size_t>(j)].b.back();
    const double err = (est.value - closed).norm();
    out.add(at_most("O" + std::to_string(j) + " vs partition estimate", err, 3.0 * est.norm_stderr(),
                    est.norm_stderr()));
    table.add({std::to_string(j), num(closed.norm()), num(est.value.norm()), num(err), num(est.norm_stderr())});
  }
  out.tables.push_back(std::move(table));

  // Single-atom cases with values worked out by hand, identity Phi.
  struct HandCase {
    std::string name;
    Vector atom;
    double rate;
    Vector a;
    Matrix o;
    Vector expected;
  };
  const int m = std::max(d, 2);
  const Vector e0 = detail::unit(m, 0);
  const Vector e1 = detail::unit(m, 1);
  Matrix shrink_first = Matrix::Identity(m, m);
  shrink_first(0, 0) = 1.0 / 3.0;
  Matrix rotate = Matrix::Identity(m, m);
  rotate.topLeftCorner(2, 2) << 0.0, -1.0, 1.0, 0.0;
  const std::vector<HandCase> cases{
      {"large atom, first axis shrunk", 3.0 * e0, 0.9, Vector::Zero(m), shrink_first, 0.9 * e0},
      {"small atom, half scaling", 0.5 * e1, 2.0, 0.3 * e0, 0.5 * Matrix::Identity(m, m), 0.15 * e0},
      {"large atom, rotation", 2.0 * e0, 0.7, Vector::Zero(m), rotate, 0.7 * e1},
      {"large atom moved into the ball", 4.0 * e0, 1.1, Vector::Zero(m), 0.2 * Matrix::Identity(m, m), 0.88 * e0},
  };
  for (const auto& hc : cases) {
    const auto chars = CylCharacteristics::compound_poisson({hc.atom}, {hc.rate}, hc.a);
    const auto triplet = pushforward(chars, HSMap(Matrix::Identity(m, m)));
    const Vector got = compose_contraction(triplet, Contraction(hc.o)).b.coords();
    out.add(at_most("hand case: " + hc.name, (got - hc.expected).norm(), 1e-10));
    const Vector direct = pushforward(chars, HSMap(hc.o)).b_theta.coords();
    out.add(at_most("hand case: " + hc.name + " (direct pushforward)", (direct - hc.expected).norm(), 1e-10));
  }
  return out;
}

}  // namespace cyllevy::verify
