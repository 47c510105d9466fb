#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>

#include <cyllevy/error.hpp>
#include <cyllevy/stable.hpp>
#include <cyllevy/stats.hpp>

#include "helpers.hpp"

namespace cyllevy {
namespace {

using testing::test_stream;

// Direct quadrature of int_0^inf (1 - cos x) x^{-1-alpha} dx, split at 1 with
// the singular head integrated after subtracting its Taylor term.
double symbol_constant_oracle(double alpha) {
  using boost::math::quadrature::gauss_kronrod;
  auto head = [alpha](double x) { return (1.0 - std::cos(x) - x * x / 2.0) * std::pow(x, -1.0 - alpha); };
  const double h = gauss_kronrod<double, 61>::integrate(head, 0.0, 1.0) + 0.5 / (2.0 - alpha);
  // Tail: int_1^inf x^{-1-alpha} - int_1^inf cos(x) x^{-1-alpha}; the oscillatory
  // part is summed over periods.
  double osc = 0.0;
  auto cosine = [alpha](double x) { return std::cos(x) * std::pow(x, -1.0 - alpha); };
  double a = 1.0;
  for (int k = 0; k < 20000; ++k) {
    const double b = a + std::numbers::pi;
    osc += gauss_kronrod<double, 31>::integrate(cosine, a, b);
    a = b;
  }
  return 2.0 * (h + 1.0 / alpha - osc);
}

TEST(StableConstants, SymbolConstantMatchesQuadrature) {
  for (double alpha : {0.8, 1.2, 1.5}) {
    EXPECT_NEAR(stable::symbol_constant(alpha), symbol_constant_oracle(alpha), 2e-4) << alpha;
  }
  EXPECT_DOUBLE_EQ(stable::symbol_constant(1.0), std::numbers::pi);
  EXPECT_NEAR(stable::symbol_constant(0.5), 2.0 * std::sqrt(2.0 * std::numbers::pi), 1e-12);
}

TEST(StableConstants, ContinuousAcrossOne) {
  EXPECT_NEAR(stable::symbol_constant(1.0 - 1e-7), std::numbers::pi, 1e-5);
  EXPECT_NEAR(stable::symbol_constant(1.0 + 1e-7), std::numbers::pi, 1e-5);
}

TEST(StableConstants, RejectsBadIndex) {
  EXPECT_THROW(stable::symbol_constant(0.0), DomainError);
  EXPECT_THROW(stable::symbol_constant(2.0), DomainError);
}

TEST(StableConstants, GaussianAbsMoment) {
  EXPECT_NEAR(stable::gaussian_abs_moment(1.0), std::sqrt(2.0 / std::numbers::pi), 1e-14);
  EXPECT_NEAR(stable::gaussian_abs_moment(2.0 - 1e-12), 1.0, 1e-9);
}

TEST(GaussianQuadraticPower, SingleEigenvalueIsScaledAbsMoment) {
  for (double alpha : {0.8, 1.2, 1.5}) {
    Vector mu = Vector::Zero(4);
    mu[2] = 2.5;
    const double expected = std::pow(2.5, alpha / 2.0) * stable::gaussian_abs_moment(alpha);
    EXPECT_NEAR(stable::gaussian_quadratic_power(mu, alpha), expected, 1e-8 * expected);
  }
}

TEST(GaussianQuadraticPower, IsotropicIsChiMoment) {
  // E (chi^2_d)^{a/2} = 2^{a/2} Gamma((d + a)/2) / Gamma(d/2).
  for (int d : {2, 5, 8}) {
    for (double alpha : {0.8, 1.5}) {
      const double expected = std::pow(2.0, alpha / 2.0) * std::tgamma((d + alpha) / 2.0) / std::tgamma(d / 2.0);
      EXPECT_NEAR(stable::gaussian_quadratic_power(Vector::Ones(d), alpha), expected, 1e-8 * expected);
    }
  }
}

TEST(GaussianQuadraticPower, WeightedDiagSumsToPower) {
  Vector mu(4);
  mu << 0.1, 0.7, 1.0, 0.0;
  for (double alpha : {0.8, 1.2, 1.5}) {
    const Vector diag = stable::gaussian_quadratic_weighted_diag(mu, alpha);
    EXPECT_NEAR(diag.sum(), stable::gaussian_quadratic_power(mu, alpha), 1e-8);
    EXPECT_EQ(diag[3], 0.0);
    EXPECT_GT(diag[2], diag[1]);
  }
}

TEST(GaussianQuadraticPower, MatchesMonteCarlo) {
  Vector mu(3);
  mu << 0.2, 0.5, 1.0;
  Stream rng = test_stream(11);
  const double alpha = 1.2;
  Moments m;
  for (int i = 0; i < 200000; ++i) {
    double q = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double z = rng.normal();
      q += mu[k] * z * z;
    }
    m.add(std::pow(q, alpha / 2.0));
  }
  const auto est = m.estimate();
  EXPECT_NEAR(stable::gaussian_quadratic_power(mu, alpha), est.value, 4.0 * est.std_error);
}

TEST(StableSamplers, SymmetricMatchesCharacteristicFunction) {
  for (double alpha : {0.8, 1.0, 1.5}) {
    Stream rng = test_stream(12);
    Matrix x(1, 100000);
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(0, j) = stable::sample_symmetric(alpha, rng);
    for (double xi : {0.3, 1.0, 2.0}) {
      const auto ecf = empirical_cf(x, Vector::Constant(1, xi));
      EXPECT_NEAR(std::abs(ecf.value - std::exp(-std::pow(xi, alpha))), 0.0, 4.0 * ecf.std_error)
          << alpha << " " << xi;
    }
  }
}

TEST(StableSamplers, PositiveMatchesLaplaceTransform) {
  for (double beta : {0.4, 0.6, 0.75}) {
    Stream rng = test_stream(13);
    for (double s : {0.5, 1.0, 3.0}) {
      Moments m;
      for (int i = 0; i < 50000; ++i) m.add(std::exp(-s * stable::sample_positive(beta, rng)));
      const auto est = m.estimate();
      EXPECT_NEAR(est.value, std::exp(-std::pow(s, beta)), 4.0 * est.std_error) << beta << " " << s;
    }
  }
}

}  // namespace
}  // namespace cyllevy
