#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "l2t/extcoh.hpp"

using namespace l2t;
using namespace l2t::testing;

namespace {

Morphism family_scalar(const BackendPtr& b, double (*fn)(double)) {
  const HObject x = HObject::free(b, 1);
  std::vector<Mat> f;
  for (double p : b->sample_points()) f.push_back(Mat::Constant(1, 1, fn(p)));
  return from_fibers(x, x, std::move(f));
}

}  // namespace

TEST(Extended, ProjectiveAndTorsionParts) {
  auto b = Backend::matrix();
  Mat a = Mat::Zero(3, 2);
  a(0, 0) = 2;
  ExtendedObject x = extended_object(from_matrix(b, a));
  EXPECT_NEAR(x.projective_dim, 2.0, 1e-12);
  EXPECT_FALSE(x.is_torsion());
  EXPECT_FALSE(x.is_projective());
  ExtendedObject z = extended_object(zero_morphism(HObject::zero(b), HObject::free(b, 2)));
  EXPECT_TRUE(z.is_projective());
  ExtendedObject t = extended_object(from_matrix(b, 3.0 * Mat::Identity(2, 2)));
  EXPECT_TRUE(t.is_trivial());
}

TEST(Extended, DeterminantLineOfTauTrivialObject) {
  auto b = Backend::unit_interval(10000);
  ExtendedObject x = extended_object(family_scalar(b, [](double p) { return p; }));
  ExtendedLine l = det_line_of_extended(x, "A", "A'");
  ASSERT_TRUE(l.canonical.has_value());
  EXPECT_NEAR(l.canonical->log_coeff, -1.0, 1e-3);
}

TEST(Extended, DeterminantLineOfDivergentObjectKeepsWord) {
  auto b = Backend::unit_interval(256);
  ExtendedObject x = extended_object(family_scalar(b, [](double p) { return std::exp(-1.0 / p); }));
  EXPECT_EQ(x.verdict.status, VerdictStatus::Divergent);
  ExtendedLine l = det_line_of_extended(x, "A", "A'");
  EXPECT_FALSE(l.canonical.has_value());
  EXPECT_EQ(l.word.exponent_of("A"), 1);
  EXPECT_EQ(l.word.exponent_of("A'"), -1);
}

TEST(Extended, PushForwardAlongIdentityIsTrivial) {
  Rng rng(31);
  auto b = Backend::matrix();
  Morphism a = from_matrix(b, random_matrix(rng, 2, 2));
  const HObject x = a.target, xp = a.source;
  DetLineElement e{{{"A", 1}, {"A'", -1}}, 0.4};
  DetLineElement y = extended_pushforward(a, a, identity(x), identity(xp), e, "A", "A'", "B", "B'");
  EXPECT_NEAR(y.log_coeff, 0.4, 1e-10);
  EXPECT_EQ(y.exponent_of("B"), 1);
  EXPECT_EQ(y.exponent_of("B'"), -1);
}

TEST(Extended, PushForwardOfProjectiveObjectsIsOrdinaryPushForward) {
  Rng rng(32);
  auto b = Backend::matrix();
  const HObject x = HObject::free(b, 2), z = HObject::zero(b);
  Morphism f = from_matrix(b, random_invertible_matrix(rng, 2));
  DetLineElement e{{{"A", 1}}, 0.0};
  DetLineElement y = extended_pushforward(zero_morphism(z, x), zero_morphism(z, x), f, identity(z), e, "A",
                                          "A'", "B", "B'");
  EXPECT_NEAR(y.log_coeff, log_fk_det(f), 1e-10);
}

TEST(Extended, KernelCokernelOfIsomorphismIsTrivial) {
  Rng rng(33);
  auto b = Backend::matrix();
  Morphism a = from_matrix(b, random_invertible_matrix(rng, 2));
  KernelCokernel kc = kernel_cokernel_lines(a, a, identity(a.target), identity(a.source));
  EXPECT_TRUE(kc.ker.is_torsion());
  EXPECT_TRUE(kc.coker.is_torsion());
}

TEST(Cohomology, BettiNumbersOfRandomComplexes) {
  Rng rng(34);
  for (auto kind : {BackendKind::Matrix, BackendKind::FiniteGroup, BackendKind::Family})
    for (int rep = 0; rep < 10; ++rep) {
      auto b = random_backend(rng, kind);
      ComplexShape sh = random_shape(rng, 4, 2, false);
      ChainComplex c = random_complex(rng, b, sh);
      CohomologyProfile p = cohomology(c);
      const double unit = HObject::free(b, 1).dim_tau();
      for (size_t k = 0; k < p.degrees.size(); ++k) {
        EXPECT_NEAR(p.degrees[k].betti, sh.betti[k] * unit, 1e-9);
        EXPECT_NEAR(p.degrees[k].betti_from_ranks, sh.betti[k] * unit, 1e-9);
      }
      EXPECT_TRUE(p.determinant_class());
    }
}

TEST(Cohomology, LaplacianIsSelfAdjoint) {
  Rng rng(35);
  auto b = Backend::matrix();
  ChainComplex c = with_random_products(rng, random_complex(rng, b, {{1, 1}, {0, 1, 0}}));
  for (int i = c.first_degree; i <= c.last_degree(); ++i) EXPECT_TRUE(is_self_adjoint(laplacian(c, i), 1e-9));
}

TEST(Cohomology, NonComplexIsRejected) {
  auto b = Backend::matrix();
  const HObject x = HObject::free(b, 1);
  ChainComplex c = make_complex({x, x, x}, {identity(x), identity(x)});
  EXPECT_THROW(validate(c), ValidationError);
  EXPECT_THROW(make_complex({x, x}, {}), ValidationError);
}

TEST(Cohomology, DivergentTorsionPart) {
  auto b = Backend::unit_interval(256);
  const HObject x = HObject::free(b, 1);
  ChainComplex c = make_complex({x, x}, {family_scalar(b, [](double p) { return std::exp(-1.0 / p); })});
  auto v = determinant_class_test(c);
  EXPECT_EQ(v[1].status, VerdictStatus::Divergent);
  EXPECT_EQ(v[0].status, VerdictStatus::Convergent);
}
