#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include <cyllevy/characteristics.hpp>
#include <cyllevy/error.hpp>
#include <cyllevy/stable.hpp>
#include <cyllevy/stats.hpp>

#include "helpers.hpp"

namespace cyllevy {
namespace {

using testing::random_hsmap;
using testing::random_vector;
using testing::test_stream;

constexpr std::complex<double> kI(0.0, 1.0);

Vector vec2(double x, double y) {
  Vector v(2);
  v << x, y;
  return v;
}

CylCharacteristics random_atomic(Stream& rng, int d, int atoms, double scale) {
  std::vector<Vector> hs;
  std::vector<double> rs;
  for (int j = 0; j < atoms; ++j) {
    hs.push_back(random_vector(rng, d, scale * rng.uniform()));
    rs.push_back(0.2 + 2.0 * rng.uniform());
  }
  return CylCharacteristics::compound_poisson(hs, rs, random_vector(rng, d, 0.3));
}

TEST(CylCharacteristics, ValidatesInputs) {
  EXPECT_THROW(CylCharacteristics(HVec::zero(2, Space::kH), Matrix::Zero(2, 2), ZeroLevy{}), DimensionError);
  Matrix asym(2, 2);
  asym << 1.0, 0.5, 0.0, 1.0;
  EXPECT_THROW(CylCharacteristics::gaussian(asym), DomainError);
  EXPECT_THROW(CylCharacteristics::gaussian(-Matrix::Identity(2, 2)), DomainError);
  EXPECT_THROW(CylCharacteristics::canonical_stable(3, 2.0), DomainError);
  EXPECT_THROW(CylCharacteristics::diagonal_stable({1.0, 0.0}, {1.0, 1.0}), DomainError);
  EXPECT_THROW(CylCharacteristics::diagonal_stable({1.0, 1.0}, {1.0, -1.0}), DomainError);
  EXPECT_THROW(CylCharacteristics::compound_poisson({vec2(1, 0)}, {0.0}), DomainError);
  EXPECT_THROW(CylCharacteristics::compound_poisson({vec2(1, 0)}, {1.0, 2.0}), DimensionError);
}

TEST(Symbol, CanonicalStable) {
  const auto chars = CylCharacteristics::canonical_stable(8, 1.3);
  Stream rng = test_stream(20);
  for (int i = 0; i < 20; ++i) {
    const HVec g(random_vector(rng, 8), Space::kG);
    const double t = 2.0 * rng.uniform();
    EXPECT_NEAR(std::abs(symbol_eval(chars, g, t) - std::exp(-t * std::pow(g.norm(), 1.3))), 0.0, 1e-14);
  }
}

TEST(Symbol, Gaussian) {
  const auto chars = CylCharacteristics::gaussian(Matrix::Identity(8, 8));
  const HVec g(Vector::LinSpaced(8, -1.0, 1.0), Space::kG);
  EXPECT_NEAR(symbol_eval(chars, g, 0.7).real(), std::exp(-0.7 * g.coords().squaredNorm() / 2.0), 1e-15);
  EXPECT_EQ(symbol_eval(chars, g, 0.7).imag(), 0.0);
}

TEST(Symbol, SingleSmallAtom) {
  const Vector h0 = vec2(0.1, -0.2);
  const double r = 1.7;
  const auto chars = CylCharacteristics::compound_poisson({h0}, {r});
  const HVec g(vec2(2.0, 0.5), Space::kG);
  const double x = g.coords().dot(h0);
  const std::complex<double> expected = std::exp(0.8 * r * (std::exp(kI * x) - 1.0 - kI * x));
  EXPECT_NEAR(std::abs(symbol_eval(chars, g, 0.8) - expected), 0.0, 1e-14);
}

TEST(Symbol, DiagonalStableAndModulusBound) {
  const auto chars = CylCharacteristics::diagonal_stable({0.8, 1.5, 1.9}, {1.0, 0.5, 0.0});
  Vector g(3);
  g << 0.4, -2.0, 7.0;
  const double expected = -std::pow(0.4, 0.8) - std::pow(1.0, 1.5);
  EXPECT_NEAR(symbol(chars, g).real(), expected, 1e-14);
  Stream rng = test_stream(21);
  const auto atomic = random_atomic(rng, 3, 4, 3.0);
  for (int i = 0; i < 100; ++i) {
    const HVec u(random_vector(rng, 3, 3.0), Space::kG);
    EXPECT_LE(std::abs(symbol_eval(atomic, u, 1.0)), 1.0 + 1e-14);
    EXPECT_LE(std::abs(symbol_eval(chars, u, 1.0)), 1.0 + 1e-14);
  }
}

TEST(Pushforward, GaussianTriplet) {
  Stream rng = test_stream(22);
  const HSMap phi = random_hsmap(rng, 5, 8, 1.3);
  const auto t = pushforward(CylCharacteristics::gaussian(Matrix::Identity(8, 8)), phi);
  EXPECT_TRUE(t.q_h.isApprox(phi.matrix() * phi.matrix().transpose(), 1e-14));
  EXPECT_EQ(t.b_theta.norm(), 0.0);
  EXPECT_TRUE(t.levy_h.empty());
  EXPECT_EQ(t.b_theta.space(), Space::kH);
}

TEST(Pushforward, SymmetricMeasuresGiveZeroDrift) {
  Stream rng = test_stream(23);
  const HSMap phi = random_hsmap(rng, 4, 4, 2.0);
  std::vector<Vector> hs;
  std::vector<double> rs;
  for (int j = 0; j < 3; ++j) {
    const Vector h = random_vector(rng, 4, 1.5);
    const double r = 1.0 + rng.uniform();
    hs.push_back(h);
    hs.push_back(-h);
    rs.push_back(r);
    rs.push_back(r);
  }
  const auto sym = pushforward(CylCharacteristics::compound_poisson(hs, rs), phi);
  EXPECT_LT(sym.b_theta.norm(), 1e-14);
  EXPECT_TRUE(is_symmetric(sym));
  for (const auto& chars : {CylCharacteristics::canonical_stable(4, 1.5),
                            CylCharacteristics::diagonal_stable({1.0, 1.2, 0.5, 1.9}, {1, 2, 3, 4})}) {
    const auto t = pushforward(chars, phi);
    EXPECT_EQ(t.b_theta.norm(), 0.0);
    EXPECT_TRUE(is_symmetric(t));
  }
}

TEST(Pushforward, SingleLargeAtomHandCase) {
  // phi h0 = (3, 0): theta maps it to (1, 0) and the indicator term vanishes.
  const double r = 0.7;
  const auto chars = CylCharacteristics::compound_poisson({vec2(1.5, 0.0)}, {r});
  const HSMap phi(2.0 * Matrix::Identity(2, 2));
  const auto t = pushforward(chars, phi);
  EXPECT_NEAR(t.b_theta.coords()[0], r, 1e-15);
  EXPECT_NEAR(t.b_theta.coords()[1], 0.0, 1e-15);
  EXPECT_NEAR(first_characteristic_direct(chars, phi, vec2(1.0, 0.0)), r, 1e-15);
  EXPECT_FALSE(is_symmetric(t));
  EXPECT_DOUBLE_EQ(tail_mass(t), r);
}

TEST(Pushforward, SmallAtomMovedOutsideBall) {
  // |h0| <= 1 but |phi h0| > 1: b = r (theta(phi h0) - phi h0).
  const double r = 1.3;
  const auto chars = CylCharacteristics::compound_poisson({vec2(0.5, 0.0)}, {r});
  const HSMap phi(4.0 * Matrix::Identity(2, 2));
  const auto t = pushforward(chars, phi);
  EXPECT_NEAR(t.b_theta.coords()[0], r * (1.0 - 2.0), 1e-15);
}

TEST(Pushforward, LinearFormMatchesDirectEvaluation) {
  Stream rng = test_stream(24);
  for (int trial = 0; trial < 200; ++trial) {
    const auto chars = random_atomic(rng, 6, 5, 3.0);
    const HSMap phi = random_hsmap(rng, 4, 6, 3.0 * rng.uniform());
    const auto t = pushforward(chars, phi);
    for (int k = 0; k < 5; ++k) {
      const Vector u = random_vector(rng, 4, 2.0);
      EXPECT_NEAR(t.b_theta.coords().dot(u), first_characteristic_direct(chars, phi, u), 1e-10);
    }
  }
}

TEST(Pushforward, SymbolCommutesWithRadonification) {
  Stream rng = test_stream(25);
  const std::vector<CylCharacteristics> family = {
      random_atomic(rng, 6, 4, 2.5),
      CylCharacteristics(HVec(random_vector(rng, 6), Space::kG), Matrix::Identity(6, 6), ZeroLevy{}),
      CylCharacteristics::canonical_stable(6, 1.2),
      CylCharacteristics::diagonal_stable({0.8, 1.2, 1.5, 1.1, 1.7, 0.6}, {1, 0.5, 2, 0, 1, 1}),
  };
  for (const auto& chars : family) {
    const HSMap phi = random_hsmap(rng, 5, 6, 2.0);
    const auto triplet = pushforward(chars, phi);
    for (int k = 0; k < 20; ++k) {
      const Vector u = random_vector(rng, 5, 1.5);
      const double t = 0.1 + rng.uniform();
      const auto lhs = std::exp(t * symbol(chars, phi.matrix().transpose() * u));
      const auto rhs = std::exp(t * genuine_symbol(triplet, u));
      EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-9);
    }
  }
}

TEST(Pushforward, DimensionMismatch) {
  EXPECT_THROW(pushforward(CylCharacteristics::zero(3), HSMap(Matrix::Identity(3, 4))), DimensionError);
}

TEST(ComposeContraction, IdentityIsExact) {
  Stream rng = test_stream(26);
  const auto t = pushforward(random_atomic(rng, 4, 6, 4.0), random_hsmap(rng, 4, 4, 2.0));
  const auto out = compose_contraction(t, Contraction::identity(4));
  EXPECT_EQ(out.b.coords(), t.b_theta.coords());
  EXPECT_FALSE(out.flagged);
}

TEST(ComposeContraction, SymmetricTripletGivesZero) {
  Stream rng = test_stream(27);
  const auto t = pushforward(CylCharacteristics::canonical_stable(8, 1.5), random_hsmap(rng, 8, 8, 1.0));
  for (int i = 0; i < 10; ++i) {
    const auto o = sample_contraction(rng, ContractionMode::kScaledSvd, 8);
    EXPECT_EQ(compose_contraction(t, o).b.norm(), 0.0);
  }
}

TEST(ComposeContraction, SingleAtomHandCase) {
  const double r = 0.9;
  const auto chars = CylCharacteristics::compound_poisson({vec2(3.0, 0.0)}, {r});
  const auto t = pushforward(chars, HSMap(Matrix::Identity(2, 2)));
  Matrix o(2, 2);
  o << 1.0 / 3.0, 0.0, 0.0, 1.0;
  const Vector expected = o * t.b_theta.coords() + r * vec2(2.0 / 3.0, 0.0);
  EXPECT_LT((compose_contraction(t, Contraction(o)).b.coords() - expected).norm(), 1e-15);
  // Same value as pushing forward through O phi directly.
  EXPECT_LT((pushforward(chars, HSMap(o)).b_theta.coords() - expected).norm(), 1e-15);
}

TEST(ComposeContraction, AgreesWithPushforwardOfComposition) {
  Stream rng = test_stream(28);
  for (int trial = 0; trial < 100; ++trial) {
    const auto chars = random_atomic(rng, 5, 6, 4.0);
    const HSMap phi = random_hsmap(rng, 5, 5, 3.0);
    const auto t = pushforward(chars, phi);
    const auto o = sample_contraction(rng, static_cast<ContractionMode>(trial % 3), 5);
    const Vector via_lemma = compose_contraction(t, o).b.coords();
    const Vector direct = pushforward(chars, o * phi).b_theta.coords();
    EXPECT_LT((via_lemma - direct).norm(), 1e-10);
    EXPECT_LE(via_lemma.norm(), t.b_theta.norm() + 2.0 * tail_mass(t) + 1e-12);
  }
}

TEST(ComposeContraction, SmallSampleIsFlagged) {
  Stream rng = test_stream(29);
  const auto t = pushforward(CylCharacteristics::canonical_stable(3, 1.5), HSMap(Matrix::Identity(3, 3)));
  const auto small = sample_tails(t, 100, rng);
  EXPECT_TRUE(compose_contraction(small, Contraction::identity(3)).flagged);
  const auto large = sample_tails(t, kMinTailSample, rng);
  EXPECT_FALSE(compose_contraction(large, Contraction::identity(3)).flagged);
}

TEST(SOperator, Examples) {
  const Matrix q = Matrix::Identity(2, 2);
  EXPECT_EQ(s_operator(q, {}), q);
  const double r = 1.6;
  const Matrix t = s_operator(Matrix::Zero(2, 2), {AtomicH{{vec2(0.5, 0.0)}, {r}}});
  Matrix expected = Matrix::Zero(2, 2);
  expected(0, 0) = r * 0.25;
  EXPECT_LT((t - expected).norm(), 1e-15);
  EXPECT_EQ(s_operator(Matrix::Zero(2, 2), {AtomicH{{vec2(1.5, 0.0)}, {r}}}).norm(), 0.0);
}

TEST(SOperator, SymmetricPsdOnRandomInputs) {
  Stream rng = test_stream(30);
  for (int trial = 0; trial < 50; ++trial) {
    const HSMap phi = random_hsmap(rng, 4, 4, 2.0);
    const auto chars = trial % 2 == 0 ? random_atomic(rng, 4, 5, 2.0)
                                      : CylCharacteristics::canonical_stable(4, 0.6 + rng.uniform());
    const auto t = pushforward(chars, phi);
    const Matrix s = s_operator(t.q_h, t.levy_h);
    EXPECT_LT((s - s.transpose()).norm(), 1e-14);
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<Matrix>(s).eigenvalues().minCoeff(), -1e-12);
  }
}

TEST(StableParts, RankOneClosedForms) {
  const double alpha = 1.5;
  const double sigma = 0.7;
  Vector e = Vector::Zero(3);
  e[1] = 1.0;
  Vector g = Vector::Zero(4);
  g[0] = 0.6;
  g[3] = 0.8;
  const HSMap phi(sigma * e * g.transpose());
  const auto t = pushforward(CylCharacteristics::canonical_stable(4, alpha), phi);
  const double c1 = stable::symbol_constant(alpha);
  EXPECT_NEAR(jump_energy(t), 4.0 / (alpha * (2.0 - alpha) * c1) * std::pow(sigma, alpha), 1e-12);
  EXPECT_NEAR(tail_mass(t), 2.0 / (alpha * c1) * std::pow(sigma, alpha), 1e-12);
  const Matrix s = s_operator(t.q_h, t.levy_h);
  EXPECT_NEAR(s(1, 1), 2.0 / ((2.0 - alpha) * c1) * std::pow(sigma, alpha), 1e-12);
  EXPECT_NEAR(s.norm(), s(1, 1), 1e-12);
}

// Oracle for the isotropic image measure: lambda_H = int N(0, 2s phi phi^T)
// nu(ds) with nu(ds) = beta / Gamma(1-beta) s^{-1-beta} ds, beta = alpha/2.
// Integrating s out in closed form leaves Gaussian expectations:
//   int min(|h|^2, 1) = E (2|phi Z|^2)^beta / Gamma(2 - beta)
//   lambda_H(|h| > 1) = E (2|phi Z|^2)^beta / Gamma(1 - beta)
//   int_{|h|<=1} h h^T = E[Y Y^T 2 beta (2|Y|^2)^{beta-1}] / ((1-beta) Gamma(1-beta)), Y = phi Z.
TEST(StableParts, IsotropicClosedFormsMatchSubordinationOracle) {
  Stream rng = test_stream(31);
  for (double alpha : {0.8, 1.2, 1.5}) {
    const double beta = alpha / 2.0;
    const HSMap phi = random_hsmap(rng, 3, 5, 1.5);
    const auto t = pushforward(CylCharacteristics::canonical_stable(5, alpha), phi);
    Moments energy;
    Moments tail;
    Matrix small = Matrix::Zero(3, 3);
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const Vector y = phi.matrix() * random_vector(rng, 5);
      const double p = std::pow(2.0 * y.squaredNorm(), beta);
      energy.add(p / std::tgamma(2.0 - beta));
      tail.add(p / std::tgamma(1.0 - beta));
      small += y * y.transpose() * (2.0 * beta * p / (2.0 * y.squaredNorm())) /
               ((1.0 - beta) * std::tgamma(1.0 - beta));
    }
    small /= n;
    EXPECT_NEAR(jump_energy(t), energy.mean(), 4.0 * energy.estimate().std_error) << alpha;
    EXPECT_NEAR(tail_mass(t), tail.mean(), 4.0 * tail.estimate().std_error) << alpha;
    EXPECT_LT((s_operator(t.q_h, t.levy_h) - small).norm(), 0.02 * small.norm()) << alpha;
  }
}

TEST(StableParts, TailSampleMatchesClosedFormMass) {
  Stream rng = test_stream(32);
  const HSMap phi = random_hsmap(rng, 4, 4, 1.2);
  for (const auto& chars : {CylCharacteristics::canonical_stable(4, 1.2),
                            CylCharacteristics::diagonal_stable({0.8, 1.2, 1.5, 1.9}, {1, 1, 1, 1})}) {
    const auto t = pushforward(chars, phi);
    const auto sampled = sample_tails(t, 50000, rng);
    EXPECT_NEAR(tail_mass(sampled), tail_mass(t), 0.02 * tail_mass(t));
    for (const auto& part : sampled.levy_h) {
      const auto& s = std::get<SampledH>(part);
      EXPECT_GT(s.points.colwise().norm().minCoeff(), 1.0);
    }
    EXPECT_THROW(jump_energy(sampled), UnsupportedError);
    EXPECT_THROW(s_operator(sampled.q_h, sampled.levy_h), UnsupportedError);
    const auto o = sample_contraction(rng, ContractionMode::kScaledSvd, 4);
    const Vector b = compose_contraction(sampled, o).b.coords();
    // Symmetric measure: the sampled estimate is zero up to Monte-Carlo error.
    EXPECT_LT(b.norm(), 0.1 * tail_mass(t));
  }
}

TEST(Triplet, SumConcatenatesParts) {
  Stream rng = test_stream(33);
  const HSMap phi = random_hsmap(rng, 3, 3, 1.0);
  const auto a = pushforward(random_atomic(rng, 3, 2, 2.0), phi);
  const auto b = pushforward(CylCharacteristics::canonical_stable(3, 1.1), phi);
  const auto s = a + b;
  EXPECT_EQ(s.levy_h.size(), a.levy_h.size() + b.levy_h.size());
  EXPECT_NEAR(jump_energy(s), jump_energy(a) + jump_energy(b), 1e-12);
  const Vector u = random_vector(rng, 3);
  EXPECT_NEAR(std::abs(genuine_symbol(s, u) - genuine_symbol(a, u) - genuine_symbol(b, u)), 0.0, 1e-12);
}

}  // namespace
}  // namespace cyllevy
