#include "verify/battery.hpp"

#include <algorithm>
#include <cmath>

#include <cyllevy/error.hpp>

namespace cyllevy::verify {

HSMap random_hsmap(Stream& rng, int dim_h, int dim_g, double hs_norm) {
  Matrix m(dim_h, dim_g);
  for (int j = 0; j < dim_g; ++j)
    for (int i = 0; i < dim_h; ++i) m(i, j) = rng.normal();
  return HSMap(hs_norm / m.norm() * m);
}

HSMap hsmap_with_singular_values(Stream& rng, int dim_h, int dim_g, const Vector& s) {
  const Matrix u = haar_orthogonal(rng, dim_h);
  const Matrix v = haar_orthogonal(rng, dim_g);
  Matrix d = Matrix::Zero(dim_h, dim_g);
  for (Eigen::Index k = 0; k < s.size(); ++k) d(k, k) = s[k];
  return HSMap(u * d * v.transpose());
}

StepFunction random_step(Stream& rng, int dim_h, int dim_g, int intervals, double hs_lo, double hs_hi) {
  std::vector<double> points{0.0, 1.0};
  while (static_cast<int>(points.size()) < intervals + 1) points.push_back(rng.uniform());
  std::sort(points.begin(), points.end());
  std::vector<HSMap> values;
  for (int i = 0; i <= intervals; ++i) {
    const double hs = hs_lo * std::pow(hs_hi / hs_lo, rng.uniform());
    values.push_back(random_hsmap(rng, dim_h, dim_g, hs));
  }
  return StepFunction(Partition(std::move(points)), std::move(values));
}

Driver gaussian_driver(Stream& rng, int d) {
  Matrix a(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) a(i, j) = rng.normal();
  const Matrix q = a * a.transpose() / d;
  return Driver(CylCharacteristics::gaussian(0.5 * (q + q.transpose())));
}

Driver compound_poisson_driver(Stream& rng, int d) {
  std::vector<Vector> atoms;
  for (double norm : {0.6, 1.5, 2.5}) atoms.push_back(norm * random_unit_vector(rng, d));
  Vector a(d);
  for (int k = 0; k < d; ++k) a[k] = 0.2 * rng.normal() / std::sqrt(static_cast<double>(d));
  return Driver(CylCharacteristics::compound_poisson(std::move(atoms), {1.0, 0.7, 0.4}, a));
}

Driver canonical_stable_driver(int d, double alpha) { return Driver(CylCharacteristics::canonical_stable(d, alpha)); }

Driver diagonal_stable_driver(int d) {
  std::vector<double> alphas;
  std::vector<double> scales;
  for (int k = 0; k < d; ++k) {
    alphas.push_back(d == 1 ? 1.5 : 0.7 + 1.2 * k / (d - 1));
    scales.push_back(1.0 / (1.0 + k));
  }
  return Driver(CylCharacteristics::diagonal_stable(alphas, scales));
}

std::vector<NamedDriver> all_driver_kinds(Stream& rng, int d) {
  Driver gauss = gaussian_driver(rng, d);
  Driver cp = compound_poisson_driver(rng, d);
  return {{"gaussian", gauss},
          {"canonical-stable", canonical_stable_driver(d, 1.5)},
          {"diagonal-stable", diagonal_stable_driver(d)},
          {"compound-poisson", cp},
          {"sum", Driver::sum({gauss, cp})}};
}

StepProcess switched(const StepFunction& psi, double switch_time, double other) {
  const auto& pts = psi.partition().points();
  const auto it = std::find(pts.begin(), pts.end(), switch_time);
  if (it == pts.end()) throw DomainError("switched: switch time is not a partition point");
  const int k = static_cast<int>(it - pts.begin());
  const Predicate up = Predicate::cumulative_until(k, 0, 0.0);
  std::vector<std::vector<Rule<HSMap>>> rules;
  for (std::size_t i = 0; i < psi.partition().intervals(); ++i) {
    const HSMap& v = psi.values()[i + 1];
    if (static_cast<int>(i) < k) {
      rules.push_back({{{}, v}});
    } else {
      rules.push_back({{{up}, v}, {{!up}, other * v}});
    }
  }
  return StepProcess(psi.partition(), std::move(rules));
}

}  // namespace cyllevy::verify
