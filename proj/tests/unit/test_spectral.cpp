#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "l2t/spectral.hpp"

using namespace l2t;
using namespace l2t::testing;

namespace {

Morphism family_scalar(const BackendPtr& b, double (*fn)(double)) {
  const HObject x = HObject::free(b, 1);
  std::vector<Mat> f;
  for (double p : b->sample_points()) f.push_back(Mat::Constant(1, 1, fn(p)));
  return from_fibers(x, x, std::move(f));
}

double xi(double x) { return x; }
double flat(double x) { return std::exp(-1.0 / x); }

}  // namespace

TEST(Spectral, DeterminantIsMultiplicative) {
  Rng rng(11);
  for (auto kind : {BackendKind::Matrix, BackendKind::FiniteGroup, BackendKind::Family})
    for (int rep = 0; rep < 20; ++rep) {
      auto b = random_backend(rng, kind);
      Morphism a = random_invertible(rng, b, 2), c = random_invertible(rng, b, 2);
      EXPECT_NEAR(log_fk_det(compose(a, c)), log_fk_det(a) + log_fk_det(c), 1e-9);
    }
}

TEST(Spectral, ScalarAndScaleLaws) {
  auto b = Backend::finite_group(Backend::cyclic_table(3), 1.5);
  const HObject x = HObject::free(b, 2);
  const double lam = 0.7;
  EXPECT_NEAR(log_fk_det(scaled(identity(x), lam)), x.dim_tau() * std::log(lam), 1e-12);
  Rng rng(12);
  Morphism a = random_invertible(rng, Backend::matrix(), 3);
  Morphism a2 = from_fibers(HObject::free(Backend::matrix(2.5), 3), HObject::free(Backend::matrix(2.5), 3), a.fibers);
  EXPECT_NEAR(log_fk_det(a2), 2.5 * log_fk_det(a), 1e-12);
}

TEST(Spectral, DeterminantIgnoresProductsOnBothSides) {
  Rng rng(13);
  auto b = Backend::matrix();
  HObject x = HObject::free(b, 3).with_product({random_positive_matrix(rng, 3)});
  Morphism a = from_fibers(x, x, {random_invertible_matrix(rng, 3)});
  EXPECT_NEAR(log_fk_det(a), std::log(std::abs(a.fibers[0].determinant())), 1e-10);
}

TEST(Spectral, SingularMorphismIsRejected) {
  auto b = Backend::matrix();
  Mat m = Mat::Identity(2, 2);
  m(1, 1) = 0;
  EXPECT_THROW(log_fk_det(from_matrix(b, m)), NotInvertible);
  EXPECT_THROW(fk_det_extended(from_matrix(b, m)), NotInjective);
}

TEST(Spectral, DensityOfIdentityFamily) {
  auto b = Backend::unit_interval(10000);
  SpectralDensity d = singular_density(family_scalar(b, xi));
  EXPECT_NEAR(d(0.5), 0.5, 1e-4);
  EXPECT_NEAR(d.total_mass(), 1.0, 1e-12);
  ExtendedDet e = fk_det_extended(family_scalar(b, xi));
  EXPECT_EQ(e.verdict.status, VerdictStatus::Convergent);
  EXPECT_NEAR(e.log_det, -1.0, 1e-3);
  ASSERT_TRUE(e.verdict.ns_exponent.has_value());
  EXPECT_NEAR(*e.verdict.ns_exponent, 1.0, 0.05);
}

TEST(Spectral, FlatFamilyIsDivergentWithMonotoneLadder) {
  auto b = Backend::unit_interval(256);
  ExtendedDet e = fk_det_extended(family_scalar(b, flat));
  EXPECT_EQ(e.verdict.status, VerdictStatus::Divergent);
  EXPECT_TRUE(std::isinf(e.log_det));
  for (size_t k = 1; k < e.verdict.ladder.size(); ++k)
    EXPECT_LE(e.verdict.ladder[k].second, e.verdict.ladder[k - 1].second + 1e-12);
  EXPECT_FALSE(e.verdict.diagnostic.empty());
}

TEST(Spectral, FiniteSpectraAreAlwaysConvergent) {
  Rng rng(14);
  Morphism a = random_invertible(rng, Backend::matrix(), 3);
  DetClassVerdict v = tau_isomorphism_test(a);
  EXPECT_EQ(v.status, VerdictStatus::Convergent);
  EXPECT_NEAR(v.log_integral, log_fk_det(a), 1e-10);
}

TEST(Spectral, NonInjectiveIsNotTauIsomorphism) {
  auto b = Backend::matrix();
  DetClassVerdict v = tau_isomorphism_test(from_matrix(b, Mat::Zero(1, 1)));
  EXPECT_EQ(v.status, VerdictStatus::Divergent);
  EXPECT_EQ(v.diagnostic, "not injective");
}

TEST(Spectral, PowerLawDensityExponent) {
  // alpha = xi^2 on (0,1]: phi(lambda) = sqrt(lambda), exponent 1/2
  auto b = Backend::unit_interval(20000);
  SpectralDensity d = singular_density(family_scalar(b, [](double x) { return x * x; }));
  auto ns = ns_exponent(d);
  ASSERT_TRUE(ns.has_value());
  EXPECT_NEAR(*ns, 0.5, 0.05);
}

TEST(Spectral, NoExponentWithoutSmallSpectrum) {
  SpectralDensity d = make_density({{1.0, 1.0}, {2.0, 1.0}}, 0.0);
  EXPECT_FALSE(ns_exponent(d).has_value());
}

TEST(Spectral, SpectralDensityOfSelfAdjoint) {
  Rng rng(15);
  auto b = Backend::matrix();
  Mat h = random_positive_matrix(rng, 4);
  SpectralDensity d = spectral_density(from_matrix(b, h));
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  double s = 0;
  for (int k = 0; k < 4; ++k) s += std::log(es.eigenvalues()(k));
  EXPECT_NEAR(d.log_integral(0), s, 1e-10);
  EXPECT_THROW(spectral_density(from_matrix(b, random_matrix(rng, 3, 3))), NotSelfAdjoint);
}

TEST(Spectral, RestrictedDeterminantSkipsKernel) {
  auto b = Backend::matrix();
  Mat m = Mat::Zero(2, 3);
  m(0, 0) = 2.0;
  m(1, 1) = 3.0;
  EXPECT_NEAR(log_det_restricted(from_matrix(b, m)), std::log(6.0), 1e-12);
}
