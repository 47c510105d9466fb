#include <gtest/gtest.h>

#include <cyllevy/error.hpp>
#include <cyllevy/linalg.hpp>

#include "helpers.hpp"

namespace cyllevy {
namespace {

using testing::random_hsmap;
using testing::random_vector;
using testing::test_stream;

TEST(Theta, InsideBallIsIdentity) {
  Vector h(3);
  h << 0.3, -0.2, 0.1;
  ASSERT_LT(h.norm(), 1.0);
  EXPECT_EQ(theta(h), h);
}

TEST(Theta, ProjectsOntoSphere) {
  Vector h = Vector::Zero(8);
  h[0] = 2.0;
  Vector expected = Vector::Zero(8);
  expected[0] = 1.0;
  EXPECT_TRUE(theta(h).isApprox(expected));
}

TEST(Theta, UnitNormTakesFirstBranch) {
  Vector h(2);
  h << 0.6, 0.8;
  EXPECT_EQ(theta(h), h);
}

TEST(Theta, NormBoundedByMinOfNormAndOne) {
  Stream rng = test_stream(1);
  for (int i = 0; i < 1000; ++i) {
    const Vector h = random_vector(rng, 5, 3.0 * rng.uniform());
    EXPECT_LE(theta(h).norm(), std::min(h.norm(), 1.0) + 1e-15);
  }
}

TEST(Theta, PreservesSpaceTag) {
  const HVec h(Vector::Constant(4, 2.0), Space::kH);
  EXPECT_EQ(theta(h).space(), Space::kH);
  EXPECT_NEAR(theta(h).norm(), 1.0, 1e-15);
}

TEST(HVec, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(HVec(Vector(), Space::kG), DimensionError);
  Vector bad = Vector::Zero(2);
  bad[1] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(HVec(bad, Space::kG), DomainError);
}

TEST(HSMap, CachesFrobeniusNorm) {
  Stream rng = test_stream(2);
  const HSMap phi = random_hsmap(rng, 4, 6, 1.7);
  EXPECT_NEAR(phi.hs_norm() * phi.hs_norm(), phi.matrix().array().square().sum(), 1e-12 * 1.7 * 1.7);
}

TEST(HSMap, ApplyChecksSpace) {
  const HSMap phi(Matrix::Identity(3, 3));
  EXPECT_THROW(phi.apply(HVec::zero(3, Space::kH)), DimensionError);
  EXPECT_THROW(phi.apply(HVec::zero(2, Space::kG)), DimensionError);
  EXPECT_EQ(phi.apply(HVec::basis(3, 1, Space::kG)).space(), Space::kH);
}

TEST(ProjectBasis, FullAndEmptyProjection) {
  Stream rng = test_stream(3);
  const HSMap phi = random_hsmap(rng, 3, 5, 1.0);
  EXPECT_EQ(project_basis(phi, 5).matrix(), phi.matrix());
  EXPECT_TRUE(project_basis(phi, 0).is_zero());
  EXPECT_THROW(project_basis(phi, 6), DomainError);
  EXPECT_THROW(project_basis(phi, -1), DomainError);
}

TEST(ProjectBasis, ResidualIsLastColumn) {
  Stream rng = test_stream(4);
  const HSMap phi = random_hsmap(rng, 3, 3, 2.0);
  const double residual = (project_basis(phi, 2) - phi).hs_norm();
  EXPECT_NEAR(residual * residual, phi.matrix().col(2).squaredNorm(), 1e-12);
}

TEST(ProjectBasis, ResidualsTelescopeAndDecrease) {
  Stream rng = test_stream(5);
  const HSMap phi = random_hsmap(rng, 8, 8, 3.0);
  double previous = std::numeric_limits<double>::infinity();
  for (int n = 0; n <= 8; ++n) {
    const double r = (project_basis(phi, n) - phi).hs_norm();
    EXPECT_LE(r, previous + 1e-12);
    previous = r;
    for (int m = 0; m <= n; ++m) {
      const double a = (project_basis(phi, n) - phi).hs_norm();
      const double b = (project_basis(phi, n) - project_basis(phi, m)).hs_norm();
      const double c = (project_basis(phi, m) - phi).hs_norm();
      EXPECT_NEAR(a * a + b * b, c * c, 1e-10);
    }
  }
  EXPECT_EQ((project_basis(phi, 8) - phi).hs_norm(), 0.0);
}

TEST(RotationAlign, AlignedVectorGivesIdentity) {
  const HVec e = HVec::basis(4, 2, Space::kH);
  const HVec h(3.0 * e.coords(), Space::kH);
  EXPECT_EQ(rotation_align(h, e).matrix(), Matrix::Identity(4, 4));
}

TEST(RotationAlign, AntiAlignedVectorGivesMinusIdentity) {
  const HVec e = HVec::basis(4, 0, Space::kH);
  const HVec h(-e.coords(), Space::kH);
  EXPECT_EQ(rotation_align(h, e).matrix(), -Matrix::Identity(4, 4));
}

TEST(RotationAlign, ZeroVectorGivesIdentity) {
  const HVec e = HVec::basis(3, 1, Space::kH);
  EXPECT_EQ(rotation_align(HVec::zero(3, Space::kH), e).matrix(), Matrix::Identity(3, 3));
}

TEST(RotationAlign, OrthogonalInput) {
  const HVec e = HVec::basis(5, 0, Space::kH);
  const HVec h(2.0 * Vector::Unit(5, 3), Space::kH);
  const Vector rh = rotation_align(h, e).matrix() * h.coords();
  EXPECT_NEAR(e.coords().dot(rh), 2.0, 1e-12);
  EXPECT_NEAR(rh.norm(), 2.0, 1e-12);
}

TEST(RotationAlign, NearlyParallelInputStaysOrthogonal) {
  Stream rng = test_stream(16);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 2 + trial % 7;
    const Vector e = random_unit_vector(rng, d);
    const double tilt = std::pow(10.0, -13.0 + 8.0 * rng.uniform());
    const Vector h = 3.0 * (e + tilt * random_unit_vector(rng, d));
    const Matrix r = rotation_align(HVec(h, Space::kH), HVec(e, Space::kH)).matrix();
    EXPECT_LE((r.transpose() * r - Matrix::Identity(d, d)).norm(), 1e-12) << tilt;
    EXPECT_NEAR(e.dot(r * h), h.norm(), 1e-12 * h.norm());
  }
}

TEST(RotationAlign, RejectsNonUnitTarget) {
  const HVec e(Vector::Constant(3, 1.0), Space::kH);
  EXPECT_THROW(rotation_align(HVec::basis(3, 0, Space::kH), e), DomainError);
}

TEST(RotationAlign, RandomPairsAreIsometriesMappingHOntoE) {
  Stream rng = test_stream(6);
  for (int trial = 0; trial < 500; ++trial) {
    const int d = 2 + trial % 7;
    const HVec h(random_vector(rng, d, 5.0 * rng.uniform()), Space::kH);
    const HVec e(random_unit_vector(rng, d), Space::kH);
    const Matrix r = rotation_align(h, e).matrix();
    const Vector x = random_vector(rng, d);
    EXPECT_NEAR((r * x).norm(), x.norm(), 1e-9);
    const Vector rh = r * h.coords();
    EXPECT_NEAR(e.coords().dot(rh), rh.norm(), 1e-9);
    // Fixes the complement of span{e, h}.
    Matrix basis(d, 2);
    basis << e.coords(), h.coords();
    const Eigen::HouseholderQR<Matrix> qr(basis);
    const Matrix q = qr.householderQ();
    for (int k = 2; k < d; ++k) EXPECT_LE((r * q.col(k) - q.col(k)).norm(), 1e-9);
  }
}

TEST(Contraction, RejectsLargeNorm) {
  EXPECT_THROW(Contraction(1.01 * Matrix::Identity(3, 3)), DomainError);
  EXPECT_NO_THROW(Contraction((1.0 + 1e-12) * Matrix::Identity(3, 3)));
  EXPECT_THROW(Contraction(Matrix::Zero(2, 3)), DimensionError);
}

TEST(SampleContraction, OrthogonalModeIsIsometry) {
  Stream rng = test_stream(7);
  for (int i = 0; i < 50; ++i) {
    const Matrix o = sample_contraction(rng, ContractionMode::kOrthogonal, 8).matrix();
    EXPECT_NEAR(spectral_norm(o), 1.0, 1e-9);
    EXPECT_TRUE((o.transpose() * o).isApprox(Matrix::Identity(8, 8), 1e-12));
  }
}

TEST(SampleContraction, ZeroSingularValuesGiveZeroMap) {
  Stream rng = test_stream(8);
  const Matrix u = haar_orthogonal(rng, 4);
  const Matrix v = haar_orthogonal(rng, 4);
  const std::vector<double> s(4, 0.0);
  EXPECT_EQ(scaled_svd_contraction(u, s, v).matrix().norm(), 0.0);
}

TEST(SampleContraction, AllModesStayInUnitBall) {
  Stream rng = test_stream(9);
  for (auto mode : {ContractionMode::kOrthogonal, ContractionMode::kScaledSvd, ContractionMode::kRankOne}) {
    for (int i = 0; i < 1000; ++i) {
      const Matrix o = sample_contraction(rng, mode, 8).matrix();
      // Independent oracle: exact singular values.
      const double exact = Eigen::JacobiSVD<Matrix>(o).singularValues()[0];
      EXPECT_LE(exact, 1.0 + 1e-9);
      EXPECT_LE(spectral_norm(o), 1.0 + 1e-9);
    }
  }
}

TEST(SpectralNorm, MatchesSvd) {
  Stream rng = test_stream(10);
  for (int i = 0; i < 200; ++i) {
    const HSMap a = random_hsmap(rng, 1 + i % 8, 1 + (i / 8) % 8, 3.0);
    const double exact = Eigen::JacobiSVD<Matrix>(a.matrix()).singularValues()[0];
    EXPECT_NEAR(spectral_norm(a.matrix()), exact, 1e-4 * exact);
    EXPECT_LE(spectral_norm(a.matrix()), exact * (1.0 + 1e-12));
  }
  EXPECT_EQ(spectral_norm(Matrix::Zero(3, 3)), 0.0);
}

TEST(Partition, DyadicAndLocate) {
  const Partition p = Partition::dyadic(0.0, 1.0, 3);
  EXPECT_EQ(p.intervals(), 8u);
  EXPECT_DOUBLE_EQ(p.mesh(), 0.125);
  EXPECT_EQ(p.locate(0.0), 0u);
  EXPECT_EQ(p.locate(0.125), 0u);
  EXPECT_EQ(p.locate(0.13), 1u);
  EXPECT_EQ(p.locate(1.0), 7u);
  EXPECT_THROW((void)p.locate(1.5), DomainError);
}

TEST(Partition, RejectsNonIncreasing) {
  EXPECT_THROW(Partition({0.0}), DomainError);
  EXPECT_THROW(Partition({0.0, 0.5, 0.5, 1.0}), DomainError);
  EXPECT_THROW(Partition({1.0, 0.0}), DomainError);
}

TEST(Partition, MergeAndRefine) {
  const Partition a({0.0, 0.3, 1.0});
  const Partition b = Partition::dyadic(0.0, 1.0, 1);
  const Partition m = Partition::merge(a, b);
  EXPECT_EQ(m.points(), (std::vector<double>{0.0, 0.3, 0.5, 1.0}));
  EXPECT_TRUE(m.refines(a));
  EXPECT_TRUE(m.refines(b));
  EXPECT_FALSE(a.refines(b));
  EXPECT_TRUE(Partition::dyadic(0.0, 1.0, 5).refines(Partition::dyadic(0.0, 1.0, 2)));
  EXPECT_THROW(Partition::merge(a, Partition({0.0, 2.0})), DomainError);
}

}  // namespace
}  // namespace cyllevy
