#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include <cyllevy/integrate.hpp>
#include <cyllevy/modular.hpp>
#include <cyllevy/parallel.hpp>
#include <cyllevy/stats.hpp>

#include "common.hpp"
#include "verify/checks.hpp"
#include "verify/enumeration.hpp"

namespace cyllevy::verify {

using detail::num;

namespace {

constexpr int kLastIndex = 12;
constexpr double kSmall = 1e-2;

GammaSearchOptions gamma_options(const ExperimentConfig& c) {
  return {c.budgets.gamma_search, std::max(kMinReplicas, c.budgets.n_mc / 2), 64, std::nullopt};
}

std::vector<NamedDriver> equivalence_drivers(const ExperimentConfig& c, const Stream& rng) {
  Stream setup = rng.split(0);
  return detail::drivers_or(c, {{"canonical-stable-1.2", canonical_stable_driver(c.dim, 1.2)},
                                {"compound-poisson", compound_poisson_driver(setup, c.dim)}});
}

// t^{-1/4} Phi_0 + cos(2 pi t) Phi_1.
Sampler equivalence_sampler(const ExperimentConfig& c, const Stream& rng) {
  Stream local = rng.split(1);
  const HSMap phi0 = random_hsmap(local, c.dim, c.dim, 1.0);
  const HSMap phi1 = random_hsmap(local, c.dim, c.dim, 1.0);
  return [phi0, phi1](double t) { return std::pow(t, -0.25) * phi0 + std::cos(2.0 * std::numbers::pi * t) * phi1; };
}

// Members psi_n - psi_{n-1}, n = 1..12, of the dyadic truncation sequence.
std::vector<StepFunction> cauchy_differences(const Sampler& sampler) {
  std::vector<StepFunction> out;
  StepFunction prev = truncated_step(sampler, 1.0, 0, 1.0);
  for (int n = 1; n <= kLastIndex; ++n) {
    StepFunction next = truncated_step(sampler, 1.0, n, std::ldexp(1.0, n));
    out.push_back(next - prev);
    prev = std::move(next);
  }
  return out;
}

StepFunction with_half_point(const StepFunction& psi) {
  return psi.refine(Partition::merge(psi.partition(), Partition({0.0, 0.5, 1.0})));
}

struct SequenceValues {
  std::vector<double> modular;
  std::vector<ScalarEstimate> ky_fan;
  std::vector<double> identity;  // Ky Fan value at Gamma = identity
};

// Sequence element k has index first + k.
void judge(CheckResult& out, Table& table, const std::string& tag, const SequenceValues& v, int first) {
  std::vector<double> kf;
  for (const auto& e : v.ky_fan) kf.push_back(e.value);
  out.add(at_least(tag + "/spearman(modular, sup-gamma ky fan)", spearman(v.modular, kf), 0.9));
  out.add(at_most(tag + "/modular at n=12", v.modular.back(), kSmall));
  out.add(at_most(tag + "/sup-gamma ky fan at n=12", kf.back(), kSmall, v.ky_fan.back().std_error));
  // Least-squares slope of log2 values over the last six elements.
  auto decay = [](const std::vector<double>& xs) {
    const std::size_t m = std::min<std::size_t>(6, xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = xs.size() - m; k < xs.size(); ++k) {
      const double x = static_cast<double>(k);
      const double y = std::log2(std::max(xs[k], 1e-300));
      sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
  };
  out.record(tag + "/log2 decay per step, modular", decay(v.modular));
  out.record(tag + "/log2 decay per step, sup-gamma ky fan", decay(kf));
  for (std::size_t n = 0; n < kf.size(); ++n)
    table.add({tag, std::to_string(first + static_cast<int>(n)), num(v.modular[n]), num(kf[n]), num(v.ky_fan[n].std_error),
               num(v.identity[n])});
}

SequenceValues deterministic_values(const std::vector<StepFunction>& seq, const Driver& driver,
                                    const ExperimentConfig& c, const Stream& rng) {
  SequenceValues v{std::vector<double>(seq.size()), std::vector<ScalarEstimate>(seq.size()),
                   std::vector<double>(seq.size())};
  for (std::size_t n = 0; n < seq.size(); ++n) {
    v.modular[n] = modular_of(driver, seq[n], c.budgets.l_search, rng.split(2 * n)).total;
    const SupGammaResult r = sup_gamma_ky_fan(seq[n], driver, gamma_options(c), rng.split(2 * n + 1));
    v.ky_fan[n] = r.value;
    v.identity[n] = r.identity.value;
  }
  return v;
}

SequenceValues predictable_values(const std::vector<StepProcess>& seq, const Driver& driver,
                                  const ExperimentConfig& c, const Stream& rng) {
  SequenceValues v{std::vector<double>(seq.size()), std::vector<ScalarEstimate>(seq.size()),
                   std::vector<double>(seq.size())};
  const std::size_t paths = std::max(kMinReplicas, c.budgets.n_mc / 10);
  for (std::size_t n = 0; n < seq.size(); ++n) {
    v.modular[n] = randomized_modular(seq[n], driver, paths, c.budgets.l_search, rng.split(2 * n)).value;
    const SupGammaResult r = sup_gamma_ky_fan(seq[n], driver, gamma_options(c), rng.split(2 * n + 1));
    v.ky_fan[n] = r.value;
    v.identity[n] = r.identity.value;
  }
  return v;
}

}  // namespace

CheckResult integration_equivalence(const ExperimentConfig& c, const Stream& rng) {
  CheckResult out;
  Table table{"sequences", {"sequence", "n", "modular", "sup_gamma_ky_fan", "se", "identity_ky_fan"}, {}};
  const StepFunction psi0 = base_integrand(c, rng.split(2));
  std::vector<StepFunction> scaling;
  for (int n = 0; n <= kLastIndex; ++n) scaling.push_back(std::ldexp(1.0, -n) * psi0);
  const auto truncation = cauchy_differences(equivalence_sampler(c, rng));
  const auto drivers = equivalence_drivers(c, rng);
  for (std::size_t k = 0; k < drivers.size(); ++k) {
    const Stream base = rng.split(10 + k);
    judge(out, table, drivers[k].name + "/scaling",
          deterministic_values(scaling, drivers[k].driver, c, base.split(0)), 0);
    judge(out, table, drivers[k].name + "/truncation",
          deterministic_values(truncation, drivers[k].driver, c, base.split(1)), 1);
  }
  out.tables.push_back(std::move(table));
  return out;
}

CheckResult predictable_equivalence(const ExperimentConfig& c, const Stream& rng) {
  CheckResult out;
  Table table{"sequences", {"sequence", "n", "randomized_modular", "sup_gamma_ky_fan", "se", "identity_ky_fan"}, {}};
  const StepFunction psi0 = with_half_point(base_integrand(c, rng.split(2)));
  std::vector<StepProcess> scaling;
  for (int n = 0; n <= kLastIndex; ++n) scaling.push_back(switched(std::ldexp(1.0, -n) * psi0, 0.5, -0.5));
  std::vector<StepProcess> truncation;
  for (const auto& diff : cauchy_differences(equivalence_sampler(c, rng)))
    truncation.push_back(switched(diff, 0.5, -0.5));
  const auto drivers = equivalence_drivers(c, rng);
  for (std::size_t k = 0; k < drivers.size(); ++k) {
    const Stream base = rng.split(10 + k);
    judge(out, table, drivers[k].name + "/scaling",
          predictable_values(scaling, drivers[k].driver, c, base.split(0)), 0);
    judge(out, table, drivers[k].name + "/truncation",
          predictable_values(truncation, drivers[k].driver, c, base.split(1)), 1);
  }
  out.tables.push_back(std::move(table));
  return out;
}

CheckResult semimartingale_bound(const ExperimentConfig& c, const Stream& rng) {
  CheckResult out;
  const int d = c.dim;
  Stream setup = rng.split(0);
  const StepFunction base = with_half_point(base_integrand(c, rng.split(2)));
  const HSMap phi0 = random_hsmap(setup, d, d, 1.0);
  const StepFunction power =
      truncated_step([phi0](double t) { return std::pow(t, -0.25) * phi0; }, 1.0, 4, 16.0);
  struct Case {
    std::string name;
    StepProcess psi;
    Driver driver;
  };
  std::vector<Case> cases{
      {"deterministic", to_process(base), canonical_stable_driver(d, 1.5)},
      {"switched", switched(base, 0.5, -0.5), compound_poisson_driver(setup, d)},
      {"power", to_process(power), diagonal_stable_driver(d)},
  };
  if (c.driver)
    for (auto& cs : cases) cs.driver = *c.driver;
  const std::size_t members = detail::battery_size(c, 200);
  GammaSearchOptions options = gamma_options(c);
  options.n_mc = c.budgets.n_mc;
  Table table{"quantiles", {"case", "member", "q99"}, {}};
  for (std::size_t k = 0; k < cases.size(); ++k) {
    const auto q = gamma_family_quantiles(cases[k].psi, cases[k].driver, 2 * members, 0.99, options, rng.split(1 + k));
    const double small = *std::max_element(q.begin(), q.begin() + static_cast<std::ptrdiff_t>(members));
    const double large = *std::max_element(q.begin(), q.end());
    out.add(at_most(cases[k].name + "/relative change of max q99 when the family doubles", (large - small) / small,
                    0.05));
    out.record(cases[k].name + "/max q99 (" + std::to_string(members) + " members)", small);
    out.record(cases[k].name + "/max q99 (" + std::to_string(2 * members) + " members)", large);
    for (std::size_t m = 0; m < q.size(); ++m) table.add({cases[k].name, std::to_string(m), num(q[m])});
  }
  out.tables.push_back(std::move(table));
  return out;
}

CheckResult dominated_convergence(const ExperimentConfig& c, const Stream& rng) {
  CheckResult out;
  const int d = c.dim;
  Stream setup = rng.split(0);
  const Partition p = Partition::dyadic(0.0, 1.0, 2);
  // Small base values with a rare branch of HS norm 2, which the truncation
  // 1{|V| <= n} removes at n = 1. Each rare event has probability about 0.02.
  auto make = [&](const Driver& driver, const std::function<Predicate(int)>& rare_at) {
    std::vector<std::vector<Rule<HSMap>>> rules;
    rules.push_back({{{}, random_hsmap(setup, d, d, 0.02)}});
    for (int i = 1; i < 4; ++i) {
      const Predicate rare = rare_at(i - 1);
      rules.push_back({{{rare}, random_hsmap(setup, d, d, 2.0)}, {{!rare}, random_hsmap(setup, d, d, 0.02)}});
    }
    return std::make_pair(StepProcess(p, std::move(rules)), driver);
  };
  // Three or more jumps in 0.25 time units at total rate 2.1.
  const auto many_jumps = [](int i) { return Predicate::jumps_at_least(i, 3); };
  // <L(t_{i+1}) - L(t_i), e_0> > 2 for the alpha = 1.5 stable driver.
  const auto large_coord = [](int i) { return Predicate::coord_above(i, 0, 2.0); };
  std::vector<std::pair<std::string, std::pair<StepProcess, Driver>>> cases{
      {"compound-poisson", make(compound_poisson_driver(setup, d), many_jumps)},
      {"canonical-stable-1.5", make(canonical_stable_driver(d, 1.5), large_coord)},
      {"sum", make(Driver::sum({gaussian_driver(setup, d), compound_poisson_driver(setup, d)}), many_jumps)},
  };
  if (c.driver)
    for (auto& cs : cases) cs.second.second = *c.driver;
  Table table{"sequence", {"case", "n", "sup_gamma_ky_fan", "se"}, {}};
  for (std::size_t k = 0; k < cases.size(); ++k) {
    const StepProcess& psi = cases[k].second.first;
    const Driver& driver = cases[k].second.second;
    double upsilon = 0.0;
    std::vector<double> values;
    ScalarEstimate last;
    for (int n = 1; n <= 16; ++n) {
      // Psi - Psi_n with Psi_n = Psi 1{|Psi| <= n} / (1 + 1/n).
      std::vector<std::vector<Rule<HSMap>>> rules;
      for (std::size_t i = 0; i < psi.intervals(); ++i) {
        std::vector<Rule<HSMap>> ri;
        for (const auto& r : psi.rules(i)) {
          upsilon = std::max(upsilon, r.value.hs_norm());
          const double kept = r.value.hs_norm() <= n ? 1.0 / (1.0 + 1.0 / n) : 0.0;
          ri.push_back({r.when, (1.0 - kept) * r.value});
        }
        rules.push_back(std::move(ri));
      }
      last = sup_gamma_ky_fan(StepProcess(psi.partition(), std::move(rules)), driver, gamma_options(c),
                              rng.split(100 * (k + 1) + static_cast<std::uint64_t>(n)))
                 .value;
      values.push_back(last.value);
      table.add({cases[k].first, std::to_string(n), num(last.value), num(last.std_error)});
    }
    std::vector<double> index(values.size());
    for (std::size_t n = 0; n < index.size(); ++n) index[n] = static_cast<double>(n + 1);
    out.add(at_most(cases[k].first + "/sup-gamma ky fan of Psi - Psi_16", last.value, kSmall, last.std_error));
    out.record(cases[k].first + "/spearman(n, ky fan)", spearman(index, values));
    out.record(cases[k].first + "/sup |Upsilon|_HS", upsilon);
  }
  out.tables.push_back(std::move(table));
  return out;
}

CheckResult enumeration_oracle(const ExperimentConfig& c, const Stream& rng) {
  CheckResult out;
  const int d = c.dim;
  Stream setup = rng.split(0);
  const std::size_t n = 10 * c.budgets.n_mc;
  const Partition p = Partition::dyadic(0.0, 1.0, 1);
  const std::vector<double> dts{0.5, 0.5};
  struct Case {
    std::string name;
    std::vector<Vector> atoms;
    std::vector<double> rates;
    Vector a;
    StepProcess psi;
    std::function<Vector(const CountPath&)> functional;
  };
  const HSMap f0 = random_hsmap(setup, d, d, 1.0);
  const HSMap f1 = random_hsmap(setup, d, d, 1.0);
  const HSMap f2 = random_hsmap(setup, d, d, 1.5);
  const Vector h1 = 1.4 * random_unit_vector(setup, d);
  const Vector h2 = 0.7 * random_unit_vector(setup, d);
  const Vector drift = 0.1 * random_unit_vector(setup, d);
  const Predicate jumped = Predicate::jumps_at_least(0, 1);
  const Predicate up = Predicate::coord_sign(0, 0);
  const Predicate twice = Predicate::jumps_at_least(0, 2);
  const Matrix& m0 = f0.matrix();
  const Matrix& m1 = f1.matrix();
  const Matrix& m2 = f2.matrix();
  std::vector<Case> cases;
  cases.push_back({"one atom, jump-selected coefficient", {h1}, {1.2}, drift,
                   StepProcess(p, {{{{}, f0}}, {{{jumped}, f1}, {{!jumped}, f2}}}),
                   [&](const CountPath& path) {
                     const Matrix& second = path.jumps[0] >= 1 ? m1 : m2;
                     return Vector(m0 * path.increments.col(0) + second * path.increments.col(1));
                   }});
  cases.push_back({"two atoms, sign-selected coefficient", {h1, h2}, {0.8, 1.3}, drift,
                   StepProcess(p, {{{{}, f0}}, {{{up}, f1}, {{!up}, -1.0 * f1}}}),
                   [&](const CountPath& path) {
                     const double sign = path.increments(0, 0) > 0.0 ? 1.0 : -1.0;
                     return Vector(m0 * path.increments.col(0) + sign * (m1 * path.increments.col(1)));
                   }});
  cases.push_back({"two atoms, count-selected coefficient", {h1, -h2}, {0.9, 1.1}, Vector::Zero(d),
                   StepProcess(p, {{{{}, f2}}, {{{twice}, 0.5 * f0}, {{jumped, !twice}, f1}, {{!jumped}, f2}}}),
                   [&](const CountPath& path) {
                     const int k = path.jumps[0];
                     const Matrix second = k >= 2 ? Matrix(0.5 * m0) : (k == 1 ? m1 : m2);
                     return Vector(m2 * path.increments.col(0) + second * path.increments.col(1));
                   }});
  Table table{"oracle", {"case", "total_variation", "missing_mass", "support_points"}, {}};
  for (std::size_t k = 0; k < cases.size(); ++k) {
    const Case& cs = cases[k];
    const Driver driver(CylCharacteristics::compound_poisson(cs.atoms, cs.rates, cs.a));
    const EmpiricalLaw law = integrate_step_pred(cs.psi, driver, n, rng.split(1 + k));
    const DiscreteLaw oracle = enumerate_law(cs.atoms, cs.rates, cs.a, dts, 6, cs.functional);
    const double tv = total_variation(law.samples(), oracle);
    out.add(at_most(cs.name + "/total variation", tv, 0.02));
    table.add({cs.name, num(tv), num(oracle.missing), std::to_string(oracle.points.size())});
  }
  out.tables.push_back(std::move(table));
  return out;
}

}  // namespace cyllevy::verify
