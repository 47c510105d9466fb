#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <cyllevy/error.hpp>
#include <cyllevy/limits.hpp>
#include <cyllevy/modular.hpp>

#include "helpers.hpp"

namespace cyllevy {
namespace {

using testing::random_hsmap;
using testing::test_stream;

constexpr int kBudget = 400;

Driver gaussian_driver(int d) { return Driver(CylCharacteristics::gaussian(Matrix::Identity(d, d))); }

// Asymmetric atoms inside and outside the unit ball plus a drift.
Driver skewed_driver() {
  Vector a(2);
  a << 0.2, -0.1;
  Vector h1(2);
  h1 << 3.0, 0.0;
  Vector h2(2);
  h2 << 0.5, 0.5;
  Vector h3(2);
  h3 << -0.4, 1.6;
  return Driver(CylCharacteristics::compound_poisson({h1, h2, h3}, {1.0, 2.0, 0.7}, a));
}

StepFunction random_step(Stream& rng, int dh, int dg, int level, double scale) {
  const Partition p = Partition::dyadic(0.0, 1.0, level);
  std::vector<HSMap> values;
  for (std::size_t i = 0; i <= p.intervals(); ++i) values.push_back(random_hsmap(rng, dh, dg, scale * rng.uniform()));
  return StepFunction(p, std::move(values));
}

// Independent evaluation of b^theta_{O Phi} for an atomic driver with Phi = I:
// O a + sum_j r_j (theta(O h_j) - O h_j 1{|h_j| <= 1}).
Vector composed_drift_oracle(const Matrix& o, const Vector& a, const std::vector<Vector>& atoms,
                             const std::vector<double>& rates) {
  Vector b = o * a;
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    const Vector oh = o * atoms[j];
    const Vector th = oh.norm() <= 1.0 ? oh : Vector(oh / oh.norm());
    b += rates[j] * (th - (atoms[j].norm() <= 1.0 ? oh : Vector::Zero(2)));
  }
  return b;
}

// Brute force over a grid of 2x2 contractions R(u) diag(s1, s2) R(v).
double brute_force_l(const Vector& a, const std::vector<Vector>& atoms, const std::vector<double>& rates) {
  auto rot = [](double t) {
    Matrix r(2, 2);
    r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
    return r;
  };
  Matrix flip = Matrix::Identity(2, 2);
  flip(1, 1) = -1.0;
  double best = 0.0;
  constexpr int kAngles = 48;
  constexpr int kScales = 8;
  for (int iu = 0; iu < kAngles; ++iu)
    for (int iv = 0; iv < kAngles; ++iv)
      for (int s1 = 0; s1 <= kScales; ++s1)
        for (int s2 = 0; s2 <= kScales; ++s2)
          for (int f = 0; f < 2; ++f) {
            Matrix s = Matrix::Zero(2, 2);
            s(0, 0) = static_cast<double>(s1) / kScales;
            s(1, 1) = static_cast<double>(s2) / kScales;
            const double tu = 2.0 * std::numbers::pi * iu / kAngles;
            const double tv = 2.0 * std::numbers::pi * iv / kAngles;
            const Matrix o = rot(tu) * s * (f == 0 ? Matrix(rot(tv)) : Matrix(flip * rot(tv)));
            best = std::max(best, composed_drift_oracle(o, a, atoms, rates).norm());
          }
  return best;
}

// ---- StepFunction -------------------------------------------------------------

TEST(StepFunction, ValidatesShape) {
  const Partition p = Partition::dyadic(0.0, 1.0, 1);
  EXPECT_THROW(StepFunction(p, {HSMap::zero(2, 2), HSMap::zero(2, 2)}), DimensionError);
  EXPECT_THROW(StepFunction(p, {HSMap::zero(2, 2), HSMap::zero(2, 2), HSMap::zero(3, 2)}), DimensionError);
}

TEST(StepFunction, AtAndRefine) {
  const Partition p = Partition::dyadic(0.0, 1.0, 1);
  const HSMap f0(Matrix::Constant(1, 1, 7.0));
  const HSMap f1(Matrix::Constant(1, 1, 1.0));
  const HSMap f2(Matrix::Constant(1, 1, 2.0));
  const StepFunction psi(p, {f0, f1, f2});
  EXPECT_EQ(psi.at(0.0).matrix()(0, 0), 7.0);
  EXPECT_EQ(psi.at(0.5).matrix()(0, 0), 1.0);
  EXPECT_EQ(psi.at(0.51).matrix()(0, 0), 2.0);
  const StepFunction fine = psi.refine(Partition::dyadic(0.0, 1.0, 3));
  ASSERT_EQ(fine.intervals(), 8u);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(fine.on_interval(i).matrix()(0, 0), i < 4 ? 1.0 : 2.0);
  EXPECT_THROW((void)psi.refine(Partition({0.0, 0.3, 1.0})), DomainError);
}

TEST(StepFunction, DifferenceOnMergedPartition) {
  const StepFunction a(Partition({0.0, 0.3, 1.0}),
                       {HSMap::zero(1, 1), HSMap(Matrix::Constant(1, 1, 1.0)), HSMap(Matrix::Constant(1, 1, 2.0))});
  const StepFunction b = StepFunction::constant(Partition::dyadic(0.0, 1.0, 1), HSMap(Matrix::Constant(1, 1, 1.0)));
  const StepFunction d = a - b;
  EXPECT_EQ(d.partition().points(), (std::vector<double>{0.0, 0.3, 0.5, 1.0}));
  EXPECT_EQ(d.on_interval(0).matrix()(0, 0), 0.0);
  EXPECT_EQ(d.on_interval(1).matrix()(0, 0), 1.0);
  EXPECT_EQ(d.on_interval(2).matrix()(0, 0), 1.0);
  EXPECT_EQ(d.initial().matrix()(0, 0), -1.0);
}

// ---- k and l ----------------------------------------------------------------

TEST(KOf, ZeroAndGaussianTrace) {
  Stream rng = test_stream(100);
  const HSMap phi = random_hsmap(rng, 3, 4, 1.3);
  EXPECT_EQ(k_of(gaussian_driver(4), HSMap::zero(3, 4)), 0.0);
  EXPECT_NEAR(k_of(gaussian_driver(4), phi), (phi.matrix() * phi.matrix().transpose()).trace(), 1e-12);
}

TEST(KOf, RankOneStableMatchesPartitionEstimate) {
  const int d = 4;
  const double alpha = 1.2;
  const Driver driver(CylCharacteristics::canonical_stable(d, alpha));
  Matrix f = Matrix::Zero(3, d);
  f(1, 2) = 0.8;
  const HSMap phi(f);
  const auto k = partition_estimate_k(driver, phi, 0.0, 1.0, {8}, 8000, test_stream(101));
  EXPECT_NEAR(k_of(driver, phi), k.back().value, 3.0 * k.back().std_error);
}

TEST(KOf, ContractionMonotone) {
  Stream rng = test_stream(102);
  const Driver drivers[] = {skewed_driver(), Driver(CylCharacteristics::canonical_stable(2, 1.4)), gaussian_driver(2)};
  for (const Driver& driver : drivers) {
    for (int i = 0; i < 50; ++i) {
      const HSMap phi = random_hsmap(rng, 2, 2, 3.0 * rng.uniform());
      const Contraction o = sample_contraction(rng, static_cast<ContractionMode>(i % 3), 2);
      EXPECT_LE(k_of(driver, o * phi), k_of(driver, phi) * (1.0 + 1e-9) + 1e-12);
    }
  }
}

TEST(KOf, ScalingMonotone) {
  Stream rng = test_stream(103);
  const Driver driver = skewed_driver();
  const HSMap phi = random_hsmap(rng, 2, 2, 1.0);
  double previous = 0.0;
  for (double s = 0.0; s <= 5.0; s += 0.25) {
    const double k = k_of(driver, s * phi);
    EXPECT_GE(k, previous - 1e-12);
    previous = k;
  }
}

TEST(LOf, SymmetricAndZeroGiveExactZero) {
  Stream rng = test_stream(104);
  const HSMap phi = random_hsmap(rng, 3, 3, 2.0);
  const Driver stable(CylCharacteristics::canonical_stable(3, 1.5));
  const Driver pairs(CylCharacteristics::compound_poisson({Vector::Constant(3, 2.0), Vector::Constant(3, -2.0)},
                                                          {0.5, 0.5}));
  for (const Driver* d : {&stable, &pairs}) {
    const LBounds l = l_of(*d, phi, kBudget, test_stream(105));
    EXPECT_EQ(l.lower, 0.0);
    EXPECT_EQ(l.upper, 0.0);
  }
  const LBounds z = l_of(skewed_driver(), HSMap::zero(2, 2), kBudget, test_stream(105));
  EXPECT_EQ(z.lower, 0.0);
  EXPECT_EQ(z.upper, 0.0);
  EXPECT_THROW(l_of(skewed_driver(), HSMap::zero(2, 2), 0, test_stream(105)), DomainError);
}

TEST(LOf, SingleAtomMatchesBruteForce) {
  const double r = 0.7;
  Vector h(2);
  h << 3.0, 0.0;
  const Driver driver(CylCharacteristics::compound_poisson({h}, {r}));
  const LBounds l = l_of(driver, HSMap(Matrix::Identity(2, 2)), kBudget, test_stream(106));
  const double oracle = brute_force_l(Vector::Zero(2), {h}, {r});
  EXPECT_NEAR(oracle, r, 1e-12);
  EXPECT_GE(l.lower, r - 1e-12);
  EXPECT_LE(l.lower, r + 1e-12);
  EXPECT_NEAR(l.upper, 3.0 * r, 1e-12);
}

TEST(LOf, SkewedAtomsReachBruteForceSupremum) {
  Vector a(2);
  a << 0.2, -0.1;
  std::vector<Vector> atoms(3, Vector(2));
  atoms[0] << 3.0, 0.0;
  atoms[1] << 0.5, 0.5;
  atoms[2] << -0.4, 1.6;
  const std::vector<double> rates{1.0, 2.0, 0.7};
  const double oracle = brute_force_l(a, atoms, rates);
  const LBounds l = l_of(skewed_driver(), HSMap(Matrix::Identity(2, 2)), kBudget, test_stream(107));
  EXPECT_GE(l.lower, oracle * (1.0 - 1e-3));
  EXPECT_LE(l.lower, l.upper);
  // The reported argmax attains the lower bound.
  EXPECT_NEAR(composed_drift_oracle(l.argmax.matrix(), a, atoms, rates).norm(), l.lower, 1e-12);
}

TEST(LOf, OrderedAndSignInvariant) {
  Stream rng = test_stream(108);
  const Driver driver = skewed_driver();
  for (int i = 0; i < 30; ++i) {
    const HSMap phi = random_hsmap(rng, 2, 2, 4.0 * rng.uniform());
    const LBounds plus = l_of(driver, phi, 64, test_stream(109));
    const LBounds minus = l_of(driver, -1.0 * phi, 64, test_stream(109));
    EXPECT_LE(plus.lower, plus.upper + 1e-12);
    EXPECT_EQ(plus.lower, minus.lower);
  }
}

// ---- modular -------------------------------------------------------------------

TEST(ModularOf, ZeroStepIsZero) {
  const auto psi = StepFunction::constant(Partition::dyadic(0.0, 1.0, 3), HSMap::zero(2, 2));
  const ModularValue m = modular_of(skewed_driver(), psi, kBudget, test_stream(110));
  EXPECT_EQ(m.total, 0.0);
}

TEST(ModularOf, GaussianQuarterNormGivesHalf) {
  Stream rng = test_stream(111);
  const HSMap phi = random_hsmap(rng, 3, 3, 0.5);
  const auto psi = StepFunction::constant(Partition::dyadic(0.0, 1.0, 2), phi);
  const ModularValue m = modular_of(gaussian_driver(3), psi, kBudget, test_stream(112));
  EXPECT_NEAR(m.total, 0.5, 1e-12);
  EXPECT_NEAR(m.m_prime, 0.25, 1e-12);
  EXPECT_NEAR(m.m_double_prime, 0.25, 1e-12);
  EXPECT_EQ(m.l_gap, 0.0);
}

TEST(ModularOf, InitialValueIsNull) {
  const Partition p = Partition::dyadic(0.0, 1.0, 1);
  const StepFunction a(p, {HSMap::zero(1, 1), HSMap::zero(1, 1), HSMap::zero(1, 1)});
  const StepFunction b(p, {HSMap(Matrix::Constant(1, 1, 9.0)), HSMap::zero(1, 1), HSMap::zero(1, 1)});
  EXPECT_EQ(modular_of(gaussian_driver(1), b, kBudget, test_stream(113)).total, 0.0);
  EXPECT_EQ(quasi_metric(gaussian_driver(1), a, b, kBudget, test_stream(113)), 0.0);
}

TEST(ModularOf, TotalIsSumOfParts) {
  Stream rng = test_stream(114);
  for (int i = 0; i < 10; ++i) {
    const StepFunction psi = random_step(rng, 2, 2, 3, 3.0);
    const ModularValue m = modular_of(skewed_driver(), psi, 64, test_stream(115));
    EXPECT_NEAR(m.total, m.m_prime + m.m_double_prime, 1e-12);
    EXPECT_GE(m.m_prime, 0.0);
    EXPECT_GE(m.m_double_prime, 0.0);
    EXPECT_GE(m.l_gap, -1e-12);
  }
}

TEST(ModularOf, ScalingMonotoneAndVanishingDilation) {
  Stream rng = test_stream(116);
  const Driver drivers[] = {skewed_driver(), Driver(CylCharacteristics::canonical_stable(2, 1.5))};
  for (const Driver& driver : drivers) {
    const StepFunction psi = random_step(rng, 2, 2, 2, 2.0);
    double previous = std::numeric_limits<double>::infinity();
    for (int j = 0; j <= 12; ++j) {
      const double m = modular_of(driver, std::ldexp(1.0, -j) * psi, kBudget, test_stream(117)).total;
      EXPECT_LE(m, previous * (1.0 + 1e-3) + 1e-12) << j;
      previous = m;
    }
    EXPECT_LT(previous, 1e-2);
  }
}

TEST(ModularOf, RejectsMismatchedDriver) {
  const auto psi = StepFunction::constant(Partition::dyadic(0.0, 1.0, 1), HSMap::zero(2, 3));
  EXPECT_THROW(modular_of(skewed_driver(), psi, kBudget, test_stream(118)), DimensionError);
}

TEST(QuasiMetric, SymmetricAndZeroOnDiagonal) {
  Stream rng = test_stream(119);
  const Driver driver = skewed_driver();
  for (int i = 0; i < 10; ++i) {
    const StepFunction a = random_step(rng, 2, 2, 2, 3.0);
    const StepFunction b = random_step(rng, 2, 2, 3, 3.0);
    EXPECT_EQ(quasi_metric(driver, a, a, kBudget, test_stream(120)), 0.0);
    EXPECT_EQ(quasi_metric(driver, a, b, kBudget, test_stream(120)),
              quasi_metric(driver, b, a, kBudget, test_stream(120)));
  }
  EXPECT_THROW(quasi_metric(driver, random_step(rng, 2, 2, 1, 1.0), random_step(rng, 3, 2, 1, 1.0), kBudget,
                            test_stream(120)),
               DimensionError);
}

TEST(QuasiMetric, ModerateGrowthAndQuasiTriangle) {
  Stream rng = test_stream(121);
  const Driver drivers[] = {skewed_driver(), Driver(CylCharacteristics::canonical_stable(2, 1.3))};
  for (const Driver& driver : drivers) {
    for (int i = 0; i < 15; ++i) {
      const StepFunction a = random_step(rng, 2, 2, 2, 4.0);
      const StepFunction b = random_step(rng, 2, 2, 1, 4.0);
      const StepFunction c = random_step(rng, 2, 2, 2, 4.0);
      const double ma = modular_of(driver, a, kBudget, test_stream(122)).total;
      const double mb = modular_of(driver, b, kBudget, test_stream(122)).total;
      EXPECT_LE(modular_of(driver, a + b, kBudget, test_stream(122)).total, 4.0 * (ma + mb));
      const double ac = quasi_metric(driver, a, c, kBudget, test_stream(123));
      const double ab = quasi_metric(driver, a, b, kBudget, test_stream(123));
      const double bc = quasi_metric(driver, b, c, kBudget, test_stream(123));
      EXPECT_LE(ac, 4.0 * (ab + bc));
    }
  }
}

// ---- metrization ---------------------------------------------------------------

TEST(Metrize, ExponentMatchesQuasiConstant) {
  const auto params = MetrizationParams::standard();
  EXPECT_NEAR(std::pow(2.0 * params.quasi_constant, params.p), 2.0, 1e-12);
  EXPECT_NEAR(params.p, 1.0 / 3.0, 1e-12);
}

TEST(Metrize, TwoElementsGiveDirectChain) {
  Stream rng = test_stream(124);
  const Driver driver = skewed_driver();
  const std::vector<StepFunction> v{random_step(rng, 2, 2, 2, 2.0), random_step(rng, 2, 2, 2, 2.0)};
  const Metrization m = metrize(v, driver, MetrizationParams::standard(), kBudget, test_stream(125));
  const double direct = std::pow(quasi_metric(driver, v[0], v[1], kBudget, test_stream(125)),
                                 MetrizationParams::standard().p);
  EXPECT_EQ(m.distance(0, 1), direct);
  EXPECT_EQ(m.distance(0, 0), 0.0);
  EXPECT_TRUE(m.sandwich_holds);
}

TEST(Metrize, SandwichOnRandomSets) {
  Stream rng = test_stream(126);
  const Driver driver = skewed_driver();
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<StepFunction> v;
    for (int i = 0; i < 6; ++i) v.push_back(random_step(rng, 2, 2, 1 + i % 3, 0.5 + 3.0 * rng.uniform()));
    const Metrization m = metrize(v, driver, MetrizationParams::standard(), 64, test_stream(127));
    EXPECT_TRUE(m.sandwich_holds);
    for (Eigen::Index i = 0; i < 6; ++i)
      for (Eigen::Index j = 0; j < 6; ++j) {
        EXPECT_LE(m.distance(i, j), m.m_power(i, j) + 1e-12);
        EXPECT_LE(m.m_power(i, j), 2.0 * m.distance(i, j) + 1e-12);
        EXPECT_EQ(m.distance(i, j), m.distance(j, i));
      }
  }
  EXPECT_THROW(metrize({}, driver, MetrizationParams::standard(), 64, test_stream(127)), DomainError);
}

// ---- step approximation -----------------------------------------------------

TEST(StepApproximate, DyadicStepReturnedUnchanged) {
  Stream rng = test_stream(128);
  const StepFunction psi = random_step(rng, 2, 2, 3, 0.9);
  const Sampler sampler = [&psi](double t) { return psi.at(t); };
  const auto out = step_approximate(sampler, 1.0, gaussian_driver(2), 1e-9, kBudget, test_stream(129));
  EXPECT_EQ(out.level, 3);
  ASSERT_EQ(out.psi.intervals(), psi.intervals());
  for (std::size_t i = 0; i < psi.intervals(); ++i)
    EXPECT_EQ(out.psi.on_interval(i).matrix(), psi.on_interval(i).matrix());
  EXPECT_EQ(out.increments.back(), 0.0);
}

TEST(StepApproximate, RampIncrementsFollowClosedForm) {
  Stream rng = test_stream(130);
  const HSMap phi0 = random_hsmap(rng, 2, 3, 0.5);
  const Sampler ramp = [&phi0](double t) { return t * phi0; };
  const auto out = step_approximate(ramp, 1.0, gaussian_driver(3), 1e-6, kBudget, test_stream(131));
  // Midpoint values of level j and j + 1 differ by mesh/4 |phi0| on every fine
  // interval, so m = k + m'' = 2 (2^{-j-2} |phi0|)^2.
  for (std::size_t j = 0; j < out.increments.size(); ++j) {
    const double diff = std::ldexp(1.0, -static_cast<int>(j) - 2) * 0.5;
    EXPECT_NEAR(out.increments[j], 2.0 * diff * diff, 1e-12) << j;
  }
  EXPECT_LT(out.increments.back(), 1e-6);
  EXPECT_NEAR(out.increments[1] / out.increments[0], 0.25, 1e-9);
}

TEST(StepApproximate, UnboundedStableIntegrandConverges) {
  const double alpha = 1.5;
  const Driver driver(CylCharacteristics::canonical_stable(2, alpha));
  Matrix f = Matrix::Zero(2, 2);
  f(0, 0) = 1.0;
  const HSMap phi0(f);
  const Sampler sampler = [&phi0](double t) { return (1.0 / std::sqrt(t)) * phi0; };
  const auto out = step_approximate(sampler, 1.0, driver, 0.05, 16, test_stream(132));
  EXPECT_LT(out.increments.back(), 0.05);
  EXPECT_GT(out.truncation, 1.0);
  EXPECT_TRUE(out.psi.initial().is_zero());
  for (std::size_t i = 0; i < out.psi.intervals(); ++i) EXPECT_LE(out.psi.on_interval(i).hs_norm(), out.truncation);
}

TEST(StepApproximate, NonIntegrableFailsExplicitly) {
  const Driver driver = gaussian_driver(1);
  const Sampler sampler = [](double t) { return HSMap(Matrix::Constant(1, 1, std::sin(1.0 / t) * 1e3)); };
  EXPECT_THROW(step_approximate(sampler, 1.0, driver, 1e-12, 4, test_stream(133)), NonConvergenceError);
}

}  // namespace
}  // namespace cyllevy
