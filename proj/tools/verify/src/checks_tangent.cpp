#include <algorithm>
#include <cmath>
#include <map>

#include <cyllevy/integrate.hpp>
#include <cyllevy/stats.hpp>

#include "common.hpp"
#include "verify/checks.hpp"

namespace cyllevy::verify {

using detail::num;

namespace {

constexpr std::size_t kMinStratum = 500;

struct TangentCase {
  std::string name;
  StepProcess psi;
  Driver driver;
};

// Two intervals; the second coefficient depends on how many jumps the
// driver made on the first.
std::vector<TangentCase> stratified_cases(Stream& setup, int d, const Driver& cp) {
  const Partition p = Partition::dyadic(0.0, 1.0, 1);
  const HSMap f0 = random_hsmap(setup, d, d, 1.0);
  const HSMap f1 = random_hsmap(setup, d, d, 1.0);
  const HSMap f2 = random_hsmap(setup, d, d, 2.0);
  const HSMap f3 = random_hsmap(setup, d, d, 0.5);
  const Predicate one = Predicate::jumps_at_least(0, 1);
  const Predicate two = Predicate::jumps_at_least(0, 2);
  return {
      {"jump-selected", StepProcess(p, {{{{}, f0}}, {{{one}, f1}, {{!one}, f2}}}), cp},
      {"count-selected",
       StepProcess(p, {{{{}, f3}}, {{{two}, f2}, {{one, !two}, f1}, {{!one}, f0}}}), cp},
  };
}

std::vector<std::size_t> stratum_columns(const std::vector<int>& jumps, int count, bool at_least) {
  std::vector<std::size_t> cols;
  for (std::size_t r = 0; r < jumps.size(); ++r)
    if (at_least ? jumps[r] >= count : jumps[r] == count) cols.push_back(r);
  return cols;
}

Matrix columns(const Matrix& m, const std::vector<std::size_t>& cols) {
  Matrix out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j)
    out.col(static_cast<Eigen::Index>(j)) = m.col(static_cast<Eigen::Index>(cols[j]));
  return out;
}

std::vector<double> row(const Matrix& m, int r) {
  std::vector<double> out(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index c = 0; c < m.cols(); ++c) out[static_cast<std::size_t>(c)] = m(r, c);
  return out;
}

// Adapted battery for the decoupling ratios.
std::vector<TangentCase> adapted_battery(Stream& setup, int d) {
  const Driver cp = compound_poisson_driver(setup, d);
  const Driver stable = canonical_stable_driver(d, 1.5);
  const Driver sum = Driver::sum({gaussian_driver(setup, d), cp});
  const Partition p4 = Partition::dyadic(0.0, 1.0, 2);
  auto chain = [&](auto predicate) {
    std::vector<std::vector<Rule<HSMap>>> rules{{{{}, random_hsmap(setup, d, d, 1.0)}}};
    for (int i = 1; i < 4; ++i) {
      const Predicate q = predicate(i);
      rules.push_back({{{q}, random_hsmap(setup, d, d, 1.0)}, {{!q}, random_hsmap(setup, d, d, 0.3)}});
    }
    return StepProcess(p4, std::move(rules));
  };
  auto sign_chain = chain([](int i) { return Predicate::coord_sign(i - 1, 0); });
  auto jump_chain = chain([](int i) { return Predicate::jumps_at_least(i - 1, 1); });
  auto level_chain = chain([](int) { return Predicate::cumulative_above(0, 0.0); });
  StepFunction base = random_step(setup, d, d, 3, 0.5, 1.5);
  base = base.refine(Partition::merge(base.partition(), Partition({0.0, 0.5, 1.0})));
  return {
      {"sign-chain/compound-poisson", sign_chain, cp},
      {"jump-chain/compound-poisson", jump_chain, cp},
      {"level-chain/canonical-stable-1.5", level_chain, stable},
      {"sign-chain/sum", sign_chain, sum},
      {"switched/canonical-stable-1.5", switched(base, 0.5, -1.0), stable},
      {"switched/compound-poisson", switched(base, 0.5, 0.0), cp},
  };
}

}  // namespace

CheckResult tangent_laws(const ExperimentConfig& c, const Stream& rng) {
  CheckResult out;
  const int d = c.dim;
  Stream setup = rng.split(0);
  const Driver cp = detail::require_kind(c, DriverKind::kCompoundPoisson, compound_poisson_driver(setup, d),
                                         "tangent-laws");
  const std::size_t n = 5 * c.budgets.n_mc;
  Table table{"strata", {"case", "stratum", "replicas", "u_norm", "x_error", "y_error", "se"}, {}};
  const auto cases = stratified_cases(setup, d, cp);
  for (std::size_t k = 0; k < cases.size(); ++k) {
    const TangentCase& tc = cases[k];
    const TangentPair pair = tangent_pair(tc.psi, tc.driver, n, rng.split(10 + 2 * k), rng.split(11 + 2 * k));
    const double dt = tc.psi.partition().length(1);
    const Matrix no_increments = Matrix::Zero(d, 2);
    for (int stratum = 0; stratum <= 3; ++stratum) {
      const bool tail = stratum == 3;
      const auto cols = stratum_columns(pair.jumps[0], stratum, tail);
      const std::string tag = tc.name + "/first-interval jumps " + (tail ? ">=3" : "=" + std::to_string(stratum));
      if (cols.size() < kMinStratum) {
        out.record(tag + "/skipped, replicas", static_cast<double>(cols.size()));
        continue;
      }
      const std::vector<int> history_jumps{stratum, 0};
      const PathView history{no_increments, history_jumps};
      const Matrix& theta = tc.psi.select(1, history).matrix();
      const Matrix x2 = columns(pair.x_terms[1], cols);
      const Matrix y2 = columns(pair.y_terms[1], cols);
      Stream u_rng = setup.split(100 * (k + 1) + static_cast<std::uint64_t>(stratum));
      for (int j = 0; j < 5; ++j) {
        const double radius = 0.25 * std::pow(8.0, j / 4.0);
        const Vector u = radius * random_unit_vector(u_rng, d);
        const std::complex<double> target = std::exp(dt * tc.driver.symbol(theta.transpose() * u));
        const auto ex = empirical_cf(x2, u);
        const auto ey = empirical_cf(y2, u);
        const double xe = std::abs(ex.value - target);
        const double ye = std::abs(ey.value - target);
        out.add(at_most(tag + "/X_2 ecf u" + std::to_string(j), xe, 3.0 * ex.std_error, ex.std_error));
        out.add(at_most(tag + "/Y_2 ecf u" + std::to_string(j), ye, 3.0 * ey.std_error, ey.std_error));
        table.add({tc.name, std::to_string(stratum), std::to_string(cols.size()), num(radius), num(xe), num(ye),
                   num(ey.std_error)});
      }
      const Matrix y1 = columns(pair.y_terms[0], cols);
      const double rho = pearson(row(y1, 0), row(y2, 0));
      out.add(at_most(tag + "/|corr(Y_1, Y_2)|", std::abs(rho), 3.0 / std::sqrt(static_cast<double>(cols.size()))));
    }
  }

  // Deterministic coefficients: sum X and sum Y are equal in law.
  Stream det_setup = rng.split(1);
  const StepFunction psi = random_step(det_setup, d, d, 2, 0.5, 1.5);
  const std::vector<NamedDriver> det_drivers{{"compound-poisson", cp},
                                             {"canonical-stable-1.5", canonical_stable_driver(d, 1.5)}};
  for (std::size_t k = 0; k < det_drivers.size(); ++k) {
    const TangentPair pair =
        tangent_pair(to_process(psi), det_drivers[k].driver, n, rng.split(20 + 2 * k), rng.split(21 + 2 * k));
    std::vector<double> xs(pair.replicas());
    std::vector<double> ys(pair.replicas());
    for (std::size_t r = 0; r < xs.size(); ++r) {
      xs[r] = pair.x_sum.col(static_cast<Eigen::Index>(r)).norm();
      ys[r] = pair.y_sum.col(static_cast<Eigen::Index>(r)).norm();
    }
    const std::string tag = "deterministic/" + det_drivers[k].name;
    out.add(at_most(tag + "/KS statistic of |sum X| vs |sum Y|", ks_statistic(xs, ys), ks_critical(xs.size(), ys.size())));
    const ScalarEstimate kx = ky_fan(pair.x_sum);
    const ScalarEstimate ky = ky_fan(pair.y_sum);
    const double se = std::hypot(kx.std_error, ky.std_error);
    out.add(at_most(tag + "/|kyfan(sum X) - kyfan(sum Y)|", std::abs(kx.value - ky.value), 3.0 * se, se));
  }
  out.tables.push_back(std::move(table));
  return out;
}

CheckResult decoupling_ratio_check(const ExperimentConfig& c, const Stream& rng) {
  CheckResult out;
  const int d = c.dim;
  Stream setup = rng.split(0);
  const std::size_t n = c.budgets.n_mc;
  constexpr int kSignBudget = 16;

  // Deterministic coefficients, including a single term.
  const std::vector<NamedDriver> det_drivers{{"compound-poisson", compound_poisson_driver(setup, d)},
                                             {"canonical-stable-1.5", canonical_stable_driver(d, 1.5)}};
  for (int terms : {1, 3}) {
    const StepFunction psi = random_step(setup, d, d, terms, 0.5, 1.5);
    for (std::size_t k = 0; k < det_drivers.size(); ++k) {
      const Stream base = rng.split(static_cast<std::uint64_t>(10 * terms) + k);
      const TangentPair pair = tangent_pair(to_process(psi), det_drivers[k].driver, n, base.split(0), base.split(1));
      const DecouplingRatio r = decoupling_ratio(pair, kSignBudget, base.split(2));
      out.add(at_most("deterministic N=" + std::to_string(terms) + "/" + det_drivers[k].name + "/|forward - 1|",
                      std::abs(r.forward.value - 1.0), 3.0 * r.forward.std_error, r.forward.std_error));
    }
  }

  // Adapted battery, run on two independent seeds.
  Table table{"battery", {"case", "seed", "forward", "forward_se", "backward", "backward_se", "reliable"}, {}};
  const auto cases = adapted_battery(setup, d);
  std::array<double, 2> fmax{0.0, 0.0};
  std::array<double, 2> bmax{0.0, 0.0};
  bool all_reliable = true;
  for (std::size_t k = 0; k < cases.size(); ++k) {
    for (std::size_t s = 0; s < 2; ++s) {
      const Stream base = rng.split(1000 * (s + 1) + k);
      const TangentPair pair = tangent_pair(cases[k].psi, cases[k].driver, n, base.split(0), base.split(1));
      const DecouplingRatio r = decoupling_ratio(pair, kSignBudget, base.split(2));
      all_reliable = all_reliable && r.reliable;
      if (r.reliable) {
        fmax[s] = std::max(fmax[s], r.forward.value);
        bmax[s] = std::max(bmax[s], r.backward.value);
      }
      table.add({cases[k].name, std::to_string(s), num(r.forward.value), num(r.forward.std_error),
                 num(r.backward.value), num(r.backward.std_error), r.reliable ? "1" : "0"});
    }
  }
  for (std::size_t s = 0; s < 2; ++s) {
    out.record("seed " + std::to_string(s) + "/max forward ratio", fmax[s]);
    out.record("seed " + std::to_string(s) + "/max backward ratio", bmax[s]);
  }
  // Without a reliable case on some seed there is nothing to compare.
  const bool empty = fmax[0] == 0.0 || fmax[1] == 0.0;
  auto spread = [&](const std::array<double, 2>& m) { return empty ? 0.0 : std::abs(m[0] - m[1]) / std::max(m[0], m[1]); };
  Item forward = at_most("adapted/relative seed difference of max forward ratio", spread(fmax), 0.10);
  Item backward = at_most("adapted/relative seed difference of max backward ratio", spread(bmax), 0.10);
  forward.flagged = backward.flagged = empty;
  out.record("adapted/all cases reliable", all_reliable ? 1.0 : 0.0);
  out.add(forward);
  out.add(backward);
  out.tables.push_back(std::move(table));
  return out;
}

}  // namespace cyllevy::verify
