#include <gtest/gtest.h>

#include "generators.hpp"
#include "l2t/category.hpp"

using namespace l2t;
using namespace l2t::testing;

namespace {

const BackendKind kKinds[] = {BackendKind::Matrix, BackendKind::FiniteGroup, BackendKind::Family};

double expected_dim(const BackendPtr& b, int n) {
  if (b->kind() == BackendKind::Family) return b->scale() * b->total_measure() * n;
  return b->scale() * n;
}

}  // namespace

TEST(Category, TraceOfIdentityIsVonNeumannDimension) {
  Rng rng(1);
  for (auto kind : kKinds) {
    auto b = random_backend(rng, kind);
    const HObject x = HObject::free(b, 3);
    EXPECT_NEAR(trace(identity(x)).real(), expected_dim(b, 3), 1e-12);
    EXPECT_NEAR(x.dim_tau(), expected_dim(b, 3), 1e-12);
  }
}

TEST(Category, TraceIsCyclic) {
  Rng rng(2);
  for (auto kind : kKinds)
    for (int rep = 0; rep < 10; ++rep) {
      auto b = random_backend(rng, kind);
      Morphism f = random_morphism(rng, b, 2, 3), g = random_morphism(rng, b, 3, 2);
      EXPECT_LT(std::abs(trace(compose(f, g)) - trace(compose(g, f))), 1e-10);
    }
}

TEST(Category, GroupRingCoefficientsRoundTrip) {
  Rng rng(3);
  auto b = Backend::finite_group(Backend::cyclic_table(4));
  Morphism f = random_morphism(rng, b, 2, 3);
  auto coeffs = group_ring_coefficients(f);
  Morphism g = from_group_ring(b, coeffs);
  EXPECT_TRUE(approx_equal(f, g, 1e-12));
}

TEST(Category, GroupRingMultiplicationMatchesTable) {
  auto b = Backend::finite_group(Backend::cyclic_table(3));
  std::vector<cplx> g1 = {0, 1, 0}, g2 = {0, 0, 1}, e = {1, 0, 0};
  const Mat prod = group_ring_block(*b, g1) * group_ring_block(*b, g2);
  EXPECT_LT((prod - group_ring_block(*b, e)).norm(), 1e-14);
}

TEST(Category, InvalidGroupTableIsRejected) {
  EXPECT_THROW(Backend::finite_group({{0, 1}, {1, 1}}), ValidationError);
  EXPECT_THROW(Backend::finite_group({{1, 0}, {0, 1}}), ValidationError);
}

TEST(Category, AdjointRespectsProducts) {
  Rng rng(4);
  auto b = Backend::matrix();
  HObject s = HObject::free(b, 3), t = HObject::free(b, 2);
  s = s.with_product({random_positive_matrix(rng, 3)});
  t = t.with_product({random_positive_matrix(rng, 2)});
  Morphism f = from_fibers(s, t, {random_matrix(rng, 2, 3)});
  Morphism fa = adjoint(f);
  const Vec x = random_matrix(rng, 3, 1), y = random_matrix(rng, 2, 1);
  const cplx lhs = (t.product[0] * f.fibers[0] * x).dot(y);
  const cplx rhs = (s.product[0] * x).dot(fa.fibers[0] * y);
  EXPECT_LT(std::abs(lhs - rhs), 1e-10);
  EXPECT_TRUE(approx_equal(adjoint(fa), f, 1e-10));
}

TEST(Category, KernelAndImageFramesAreIsometric) {
  Rng rng(5);
  for (auto kind : kKinds) {
    auto b = random_backend(rng, kind);
    ComplexShape sh{{1, 1}, {1, 0, 1}};
    ChainComplex c = random_complex(rng, b, sh);
    const Morphism& d = c.differentials[0];
    KernelImage ki = kernel_and_image_closure(d);
    EXPECT_TRUE(approx_equal(compose(adjoint(ki.kernel_frame), ki.kernel_frame), identity(ki.kernel), 1e-9));
    EXPECT_TRUE(approx_equal(compose(adjoint(ki.image_frame), ki.image_frame), identity(ki.image), 1e-9));
    EXPECT_LT(max_abs(compose(d, ki.kernel_frame)), 1e-9);
    EXPECT_NEAR(ki.image.dim_tau() + ki.kernel.dim_tau(), d.source.dim_tau(), 1e-9);
  }
}

TEST(Category, DirectSumAndStacks) {
  Rng rng(6);
  auto b = Backend::unit_interval(8);
  Morphism f = random_morphism(rng, b, 2, 3), g = random_morphism(rng, b, 1, 2);
  Morphism s = direct_sum(f, g);
  EXPECT_EQ(s.source.dims[0], 5);
  EXPECT_EQ(s.target.dims[0], 3);
  EXPECT_NEAR(trace(compose(adjoint(s), s)).real(),
              trace(compose(adjoint(f), f)).real() + trace(compose(adjoint(g), g)).real(), 1e-10);
  Morphism h = random_morphism(rng, b, 2, 3);
  EXPECT_EQ(hstack(f, random_morphism(rng, b, 2, 1)).source.dims[0], 4);
  EXPECT_EQ(vstack(f, h).target.dims[0], 4);
}

TEST(Category, ShapeMismatchThrows) {
  auto b = Backend::matrix();
  Morphism f = from_matrix(b, Mat::Identity(2, 3));
  Morphism g = from_matrix(b, Mat::Identity(2, 2));
  EXPECT_THROW(compose(f, g), ShapeError);
  EXPECT_THROW(add(f, g), ShapeError);
}

TEST(Category, BackendMismatchThrows) {
  Morphism f = from_matrix(Backend::matrix(), Mat::Identity(2, 2));
  Morphism g = from_matrix(Backend::matrix(2.0), Mat::Identity(2, 2));
  EXPECT_THROW(compose(f, g), Error);
}

TEST(Category, StandardCoordinatesIntertwineProducts) {
  Rng rng(7);
  auto b = Backend::matrix();
  HObject x = HObject::free(b, 3).with_product({random_positive_matrix(rng, 3)});
  Morphism f = from_fibers(x, x, {random_matrix(rng, 3, 3)});
  Morphism fs = to_standard(f);
  EXPECT_NEAR(trace(compose(adjoint(f), f)).real(), (fs.fibers[0].adjoint() * fs.fibers[0]).trace().real(), 1e-9);
}
