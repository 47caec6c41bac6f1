#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "generators.hpp"
#include "l2t/torsion.hpp"

using namespace l2t;
using namespace l2t::testing;

namespace {

ChainComplex two_term(const BackendPtr& b, cplx d) {
  const HObject x = HObject::free(b, 1);
  return make_complex({x, x}, {scaled(identity(x), d)});
}

ChainComplex flat_complex(int grid) {
  auto b = Backend::unit_interval(grid);
  const HObject x = HObject::free(b, 1);
  std::vector<Mat> f;
  for (double p : b->sample_points()) f.push_back(Mat::Constant(1, 1, std::exp(-1.0 / p)));
  return make_complex({x, x}, {from_fibers(x, x, f)});
}

}  // namespace

TEST(Torsion, TwoTermComplexWithDifferentialTwo) {
  ChainComplex c = two_term(Backend::matrix(), 2.0);
  EXPECT_NEAR(log_torsion_acyclic(c), -std::log(2.0), 1e-14);
  EXPECT_NEAR(log_torsion_rho_sig(c), -std::log(2.0), 1e-14);
  TorsionReport r = torsion(c);
  ASSERT_TRUE(r.scalar_value().has_value());
  EXPECT_NEAR(*r.scalar_value(), 0.5, 1e-12);
  EXPECT_TRUE(r.eps_independence);
  EXPECT_TRUE(r.formula_agreement);
}

TEST(Torsion, UnitaryDifferentialHasTorsionOne) {
  ChainComplex c = two_term(Backend::matrix(), std::polar(1.0, std::numbers::pi / 3) - 1.0);
  EXPECT_NEAR(*torsion(c).scalar_value(), 1.0, 1e-12);
}

TEST(Torsion, NuOnTwoTermComplexIsScalarAfterCollapse) {
  ChainComplex c = two_term(Backend::matrix(), 2.0);
  DetLineElement nu = nu_map(c, standard_volume(c));
  EXPECT_EQ(nu.exponent_of("coim(C^0)"), 1);
  EXPECT_EQ(nu.exponent_of("clim(C^1)"), -1);
  EXPECT_NEAR(nu.log_coeff, 0.0, 1e-12);
}

TEST(Torsion, NuWithZeroDifferentialsIsIdentity) {
  auto b = Backend::matrix();
  const HObject x = HObject::free(b, 2), y = HObject::free(b, 1);
  ChainComplex c = make_complex({x, y}, {zero_morphism(x, y)});
  DetLineElement nu = nu_map(c, standard_volume(c, 0.7));
  EXPECT_NEAR(nu.log_coeff, 0.7, 1e-12);
  EXPECT_EQ(nu.exponent_of("harm(C^0)"), 1);
  EXPECT_EQ(nu.exponent_of("harm(C^1)"), -1);
  EXPECT_EQ(nu.frame.size(), 2u);
}

TEST(Torsion, NuIsMultiplicativeOnDirectSums) {
  Rng rng(41);
  auto b = Backend::matrix();
  for (int rep = 0; rep < 10; ++rep) {
    ChainComplex m = with_random_products(rng, random_complex(rng, b, random_shape(rng, 3, 2, false)));
    ChainComplex n = with_random_products(rng, random_complex(rng, b, random_shape(rng, 3, 2, false)));
    ChainComplex s = direct_sum(m, n);
    const double vm = nu_map(m, standard_volume(m, 0.2)).log_coeff;
    const double vn = nu_map(n, standard_volume(n, -0.5)).log_coeff;
    const double vs = nu_map(s, standard_volume(s, -0.3)).log_coeff;
    EXPECT_NEAR(vs, vm + vn, 1e-10);
  }
}

TEST(Torsion, ProjectiveFormulaMatchesBoundaryRestrictionFormula) {
  Rng rng(42);
  for (auto kind : {BackendKind::Matrix, BackendKind::FiniteGroup, BackendKind::Family})
    for (int rep = 0; rep < 20; ++rep) {
      auto b = random_backend(rng, kind);
      ChainComplex c = random_complex(rng, b, random_shape(rng, 5, 2, true), uniform_int(rng, -2, 2));
      const double a = log_torsion_acyclic(c), s = log_torsion_rho_sig(c);
      EXPECT_NEAR(a, s, 1e-8 * std::max(1.0, std::abs(a)));
    }
}

TEST(Torsion, AgreesWithIndependentLiftOracle) {
  Rng rng(43);
  auto b = Backend::matrix();
  for (int rep = 0; rep < 30; ++rep) {
    ChainComplex c = random_complex(rng, b, random_shape(rng, 5, 2, true), uniform_int(rng, -1, 1));
    TorsionReport r = torsion(c);
    ASSERT_TRUE(r.log_scalar.has_value());
    EXPECT_NEAR(*r.log_scalar, milnor_log_torsion(rng, c), 1e-8);
  }
}

TEST(Torsion, EpsilonIndependence) {
  Rng rng(44);
  for (auto kind : {BackendKind::Matrix, BackendKind::FiniteGroup, BackendKind::Family})
    for (int rep = 0; rep < 10; ++rep) {
      auto b = random_backend(rng, kind);
      ChainComplex c = random_complex(rng, b, random_shape(rng, 4, 2, false), 0, 0.05, 5.0);
      TorsionReport r = torsion(c);
      EXPECT_TRUE(r.eps_independence) << r.eps_discrepancy;
      double lo = 1e300, hi = 0;
      for (int i = c.first_degree + 1; i <= c.last_degree(); ++i) {
        SpectralDensity d = singular_density(*c.into(i));
        if (d.empty()) continue;
        lo = std::min(lo, d.smallest_positive());
        hi = std::max(hi, d.largest());
      }
      if (hi == 0) continue;
      TorsionOptions a, z;
      a.epsilon = 0.5 * lo * lo;
      z.epsilon = std::min(0.5 * (lo * lo + hi * hi), 0.99 * hi * hi);
      const TorsionReport ra = torsion(c, a), rz = torsion(c, z);
      EXPECT_NEAR(ra.combined.log_coeff, rz.combined.log_coeff, 1e-8 * std::max(1.0, std::abs(ra.combined.log_coeff)));
      EXPECT_TRUE(same_frame(ra.combined, rz.combined));
    }
}

TEST(Torsion, EpsilonAboveSpectrumIsRejected) {
  TorsionOptions o;
  o.epsilon = 5.0;
  EXPECT_THROW(torsion(two_term(Backend::matrix(), 2.0), o), ValidationError);
}

TEST(Torsion, AcyclicCombinedEqualsAcyclicFormulaForSmallEpsilon) {
  Rng rng(45);
  ChainComplex c = random_complex(rng, Backend::matrix(), {{2, 1}, {0, 0, 0}});
  TorsionOptions o;
  o.epsilon = 1e-6;
  TorsionReport r = torsion(c, o);
  EXPECT_NEAR(r.log_rho_large, log_torsion_acyclic(c), 1e-10);
  EXPECT_NEAR(*r.log_scalar, log_torsion_acyclic(c), 1e-10);
}

TEST(Torsion, FrameCovariance) {
  Rng rng(46);
  ChainComplex c = random_complex(rng, Backend::matrix(), random_shape(rng, 4, 2, false));
  const double t = 0.37;
  TorsionReport r0 = torsion(c, standard_volume(c)), r1 = torsion(c, standard_volume(c, t));
  EXPECT_NEAR(r1.combined.log_coeff - r0.combined.log_coeff, t, 1e-12);
  ASSERT_TRUE(r1.reduced && r0.reduced);
  EXPECT_NEAR(r1.reduced->log_coeff - r0.reduced->log_coeff, t, 1e-12);
}

TEST(Torsion, NonStandardProductsChangeTorsionByVolumeRatio) {
  // Changing the product of one object by A scales its frame by Det(A)^{-1/2}.
  Rng rng(47);
  ChainComplex c = random_complex(rng, Backend::matrix(), random_shape(rng, 4, 2, true));
  const int k = uniform_int(rng, 0, c.size() - 1);
  Mat p = random_positive_matrix(rng, c.objects[k].dims[0]);
  std::vector<HObject> objs = c.objects;
  objs[k] = objs[k].with_product({p});
  ChainComplex cp = make_complex(objs, c.differentials, c.first_degree);
  const double ld = std::log(p.determinant().real());
  const int deg = c.first_degree + k;
  const double sign = deg % 2 == 0 ? 1.0 : -1.0;
  EXPECT_NEAR(*torsion(cp).log_scalar, *torsion(c).log_scalar + 0.5 * sign * ld, 1e-9);
}

TEST(Torsion, DivergentComplexHasLineElementButNoScalar) {
  TorsionReport r = torsion(flat_complex(256));
  EXPECT_FALSE(r.log_scalar.has_value());
  EXPECT_FALSE(r.reduced.has_value());
  EXPECT_FALSE(r.determinant_class());
  EXPECT_TRUE(std::isfinite(r.combined.log_coeff));
  EXPECT_EQ(r.combined.exponent_of("clim(C^1)"), -1);
  EXPECT_EQ(r.combined.exponent_of("coim(C^0)"), 1);
  EXPECT_EQ(r.detclass[1].status, VerdictStatus::Divergent);
  EXPECT_EQ(r.betti[0], 0.0);
  EXPECT_EQ(r.betti[1], 0.0);
  EXPECT_EQ(r.combined.exponent_of("harm(C^0)"), 0);
  TorsionOptions o;
  o.require_scalar = true;
  EXPECT_THROW(torsion(flat_complex(256), o), NoCanonicalElement);
}

TEST(Torsion, ReducedLineWithCohomology) {
  auto b = Backend::matrix();
  const HObject x = HObject::free(b, 1);
  ChainComplex c = make_complex({x, x}, {zero_morphism(x, x)});
  TorsionReport r = torsion(c);
  ASSERT_TRUE(r.reduced.has_value());
  EXPECT_FALSE(r.log_scalar.has_value());
  EXPECT_EQ(r.reduced->exponent_of("harm(C^0)"), 1);
  EXPECT_EQ(r.reduced->exponent_of("harm(C^1)"), -1);
}

TEST(Les, DirectSumWithZeroConnectingMap) {
  Rng rng(51);
  auto b = Backend::matrix();
  ChainComplex l = random_complex(rng, b, {{1, 1}, {1, 0, 1}});
  ChainComplex n = random_complex(rng, b, {{1, 0}, {0, 1, 1}});
  ExactTriple t = random_triple(rng, l, n, false, false);
  LesCheck c = les_connecting_iso(t.l, t.m, t.n, t.alpha, t.beta);
  EXPECT_TRUE(c.pass) << c.lhs << " vs " << c.rhs;
  EXPECT_NEAR(c.log_delta, 0.0, 1e-9);
}

TEST(Les, RandomTriplesWithAnAcyclicMember) {
  Rng rng(52);
  auto b = Backend::matrix();
  for (int rep = 0; rep < 40; ++rep) {
    const int len = uniform_int(rng, 2, 4);
    auto shape = [&](bool acyclic) {
      ComplexShape sh;
      for (int k = 0; k + 1 < len; ++k) sh.ranks.push_back(uniform_int(rng, acyclic ? 1 : 0, 2));
      for (int k = 0; k < len; ++k) sh.betti.push_back(acyclic ? 0 : uniform_int(rng, 0, 1));
      return sh;
    };
    const int which = rep % 3;
    ChainComplex l = random_complex(rng, b, shape(which == 0));
    ChainComplex n = random_complex(rng, b, shape(which == 1));
    ExactTriple t = random_triple(rng, l, n, true, true);
    LesCheck c = les_connecting_iso(t.l, t.m, t.n, t.alpha, t.beta);
    EXPECT_TRUE(c.pass) << "rep " << rep << ": " << c.lhs << " vs " << c.rhs << " delta " << c.log_delta;
  }
}

TEST(Les, NotAChainMapIsRejected) {
  Rng rng(53);
  auto b = Backend::matrix();
  ChainComplex l = random_complex(rng, b, {{1}, {0, 0}});
  ChainComplex n = random_complex(rng, b, {{1}, {0, 0}});
  ExactTriple t = random_triple(rng, l, n, false, false);
  t.alpha[0] = scaled(t.alpha[0], 2.0);
  EXPECT_THROW(les_connecting_iso(t.l, t.m, t.n, t.alpha, t.beta), NotAChainMap);
}

TEST(Cone, IdentityOnAcyclicComplex) {
  Rng rng(54);
  ChainComplex c = random_complex(rng, Backend::matrix(), {{2, 1}, {0, 0, 0}});
  ChainMap id;
  for (const auto& o : c.objects) id.push_back(identity(o));
  ConeCheck k = cone_torsion_check(c, c, id);
  EXPECT_TRUE(k.pass);
  EXPECT_NEAR(k.log_rho_f, 0.0, 1e-10);
}

TEST(Cone, IdentityWithCohomologyHasTrivialTorsion) {
  Rng rng(55);
  for (int rep = 0; rep < 10; ++rep) {
    ChainComplex c = random_complex(rng, Backend::matrix(), random_shape(rng, 4, 2, false));
    ChainMap id;
    for (const auto& o : c.objects) id.push_back(identity(o));
    ConeCheck k = cone_torsion_check(c, c, id);
    EXPECT_TRUE(k.pass);
    EXPECT_NEAR(k.log_rho_f, 0.0, 1e-10);
  }
}

TEST(Cone, ZeroMapFactorizes) {
  Rng rng(56);
  auto b = Backend::matrix();
  ChainComplex c = random_complex(rng, b, {{1, 2}, {1, 0, 0}});
  ChainComplex ct = random_complex(rng, b, {{1, 1}, {0, 1, 0}});
  ChainMap f;
  for (int k = 0; k < c.size(); ++k) f.push_back(zero_morphism(c.objects[k], ct.objects[k]));
  ConeCheck k = cone_torsion_check(c, ct, f);
  EXPECT_TRUE(k.pass);
  EXPECT_NEAR(k.log_rho_f, k.log_rho_c - k.log_rho_ct, 1e-8);
  EXPECT_LT(k.shift_dual_defect, 1e-10);
}

TEST(Cone, RandomChainMaps) {
  Rng rng(57);
  auto b = Backend::matrix();
  for (int rep = 0; rep < 30; ++rep) {
    const int len = uniform_int(rng, 2, 4);
    auto shape = [&]() {
      ComplexShape sh;
      for (int k = 0; k + 1 < len; ++k) sh.ranks.push_back(uniform_int(rng, 0, 1));
      for (int k = 0; k < len; ++k) sh.betti.push_back(uniform_int(rng, 0, 1));
      return sh;
    };
    ChainComplex c = random_complex(rng, b, shape()), ct = random_complex(rng, b, shape());
    ChainMap f = random_chain_map(rng, c, ct);
    ConeCheck k = cone_torsion_check(c, ct, f);
    EXPECT_TRUE(k.pass) << "rep " << rep << ": " << k.log_rho_f << " vs " << k.predicted;
  }
}

TEST(Cone, RejectsNonChainMaps) {
  Rng rng(58);
  auto b = Backend::matrix();
  ChainComplex c = random_complex(rng, b, {{1}, {0, 0}});
  ChainMap f = {identity(c.objects[0]), scaled(identity(c.objects[1]), 2.0)};
  EXPECT_THROW(cone(c, c, f), NotAChainMap);
}

TEST(Complexes, ReindexPadAndDirectSum) {
  Rng rng(59);
  auto b = Backend::matrix();
  ChainComplex c = random_complex(rng, b, {{1, 1}, {0, 1, 0}});
  ChainComplex s = reindex(c, 1);
  EXPECT_EQ(s.first_degree, 1);
  EXPECT_NEAR(reduced_log_torsion(s), -reduced_log_torsion(c), 1e-10);
  ChainComplex p = pad(c, -1, 3);
  EXPECT_EQ(p.size(), 5);
  EXPECT_NEAR(reduced_log_torsion(p), reduced_log_torsion(c), 1e-10);
  ChainComplex a = random_complex(rng, b, {{2}, {0, 0}});
  EXPECT_NEAR(reduced_log_torsion(direct_sum(c, a)), reduced_log_torsion(c) + reduced_log_torsion(a), 1e-10);
}
