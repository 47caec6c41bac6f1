#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "generators.hpp"
#include "l2t/cellular.hpp"

using namespace l2t;
using namespace l2t::testing;

namespace {

cplx zeta(int p, int k = 1) { return std::polar(1.0, 2 * std::numbers::pi * k / p); }

// Brute force: 1/2 sum (-1)^i i log Delta_i on the scalar 4-term lens complex.
double lens_brute_force(cplx d1, cplx d3) {
  const double a = std::norm(d1), c = std::norm(d3);
  const double lap[4] = {a, a, c, c};
  double s = 0;
  for (int i = 0; i < 4; ++i) s += 0.5 * (i % 2 == 0 ? 1 : -1) * i * std::log(lap[i]);
  return s;
}

}  // namespace

TEST(Cellular, ExamplesAreValid) {
  for (const auto& k : {examples::circle(), examples::circle_two_cells(), examples::torus(), examples::lens(5, 1),
                        examples::lens(7, 2)}) {
    EXPECT_NO_THROW(validate(k));
    EXPECT_EQ(k.euler_characteristic, alternating_cell_count(k));
  }
}

TEST(Cellular, BrokenBoundaryIsRejected) {
  CellComplex k = examples::torus();
  k.boundaries["F"] = {{"a", ring_monomial(0)}};
  EXPECT_THROW(validate(k), ValidationError);
  CellComplex j = examples::circle();
  j.euler_characteristic = 1;
  EXPECT_THROW(validate(j), ValidationError);
}

TEST(Cellular, CircleCochainComplex) {
  const cplx lam = std::polar(1.0, 0.7);
  ChainComplex c = cochain_complex(examples::circle(), examples::lambda_rep(lam));
  ASSERT_EQ(c.size(), 2);
  EXPECT_LT(std::abs(c.differentials[0].fibers[0](0, 0) - (lam - 1.0)), 1e-14);
}

TEST(Cellular, RegularCircleFibers) {
  auto rep = examples::circle_regular(64);
  ChainComplex c = cochain_complex(examples::circle(), rep);
  const auto& th = rep.backend()->sample_points();
  for (int j = 0; j < 64; ++j)
    EXPECT_LT(std::abs(c.differentials[0].fibers[j](0, 0) - (std::polar(1.0, th[j]) - 1.0)), 1e-13);
}

TEST(Cellular, LensCochainDifferentials) {
  ChainComplex c = cochain_complex(examples::lens(7, 2), examples::lens_zeta(7));
  EXPECT_LT(std::abs(c.differentials[0].fibers[0](0, 0) - (zeta(7) - 1.0)), 1e-13);
  EXPECT_LT(std::abs(c.differentials[1].fibers[0](0, 0)), 1e-13);
  EXPECT_LT(std::abs(c.differentials[2].fibers[0](0, 0) - (zeta(7, 4) - 1.0)), 1e-13);
}

TEST(Cellular, DifferentialSquaresToZeroAfterRepresentation) {
  for (auto rep : {examples::lens_zeta(5), examples::lens_regular(5)}) {
    ChainComplex c = cochain_complex(examples::lens(5, 2), rep);
    EXPECT_LT(d_squared_defect(c), 1e-10);
  }
  ChainComplex t = cochain_complex(examples::torus(), examples::circle_regular(128));
  EXPECT_LT(d_squared_defect(t), 1e-10);
}

TEST(Cellular, CircleWithMinusOne) {
  TorsionReport r = combinatorial_torsion(examples::circle(), examples::lambda_rep(-1.0));
  ASSERT_TRUE(r.scalar_value().has_value());
  EXPECT_NEAR(*r.scalar_value(), 0.5, 1e-10);
}

TEST(Cellular, CircleRegularRepresentation) {
  TorsionReport r = combinatorial_torsion(examples::circle(), examples::circle_regular(4096));
  ASSERT_TRUE(r.scalar_value().has_value());
  EXPECT_NEAR(*r.scalar_value(), 1.0, 1e-3);
  EXPECT_TRUE(r.determinant_class());
  ASSERT_TRUE(r.detclass[1].ns_exponent.has_value());
  EXPECT_NEAR(*r.detclass[1].ns_exponent, 1.0, 0.1);
}

TEST(Cellular, LensSpaces) {
  for (auto [p, q] : {std::pair{5, 1}, std::pair{5, 2}, std::pair{7, 2}, std::pair{7, 3}})
    for (int k = 1; k < p; ++k) {
      CellComplex l = examples::lens(p, q);
      TorsionReport r = combinatorial_torsion(l, examples::lens_zeta(p, k));
      int qi = 1;
      while ((q * qi) % p != 1) ++qi;
      ASSERT_TRUE(r.log_scalar.has_value());
      EXPECT_NEAR(*r.log_scalar, lens_brute_force(zeta(p, k) - 1.0, zeta(p, k * qi) - 1.0), 1e-8);
    }
  const double z = std::abs(zeta(5) - 1.0);
  EXPECT_NEAR(*combinatorial_torsion(examples::lens(5, 1), examples::lens_zeta(5)).scalar_value(),
              1.0 / (z * z), 1e-8);
}

TEST(Cellular, LensRegularRepresentationHasCohomology) {
  TorsionReport r = combinatorial_torsion(examples::lens(5, 1), examples::lens_regular(5));
  EXPECT_FALSE(r.log_scalar.has_value());
  ASSERT_TRUE(r.reduced.has_value());
  EXPECT_NEAR(r.betti[0], 1.0 / 5, 1e-12);
  EXPECT_NEAR(r.betti[3], 1.0 / 5, 1e-12);
}

TEST(Cellular, TorusTwistedIsAcyclicWithTorsionOne) {
  TorsionReport r = combinatorial_torsion(examples::torus(), examples::lambda_rep(std::polar(1.0, 1.1)));
  ASSERT_TRUE(r.scalar_value().has_value());
  EXPECT_NEAR(*r.scalar_value(), 1.0, 1e-10);
}

TEST(Cellular, TwoCellCircleMatchesReidemeisterFormula) {
  for (double th : {0.3, 1.7, 3.0}) {
    const cplx lam = std::polar(1.0, th);
    TorsionReport r = combinatorial_torsion(examples::circle_two_cells(), examples::lambda_rep(lam));
    EXPECT_NEAR(*r.scalar_value(), 1.0 / std::abs(lam - 1.0), 1e-10);
  }
}

TEST(Cellular, NonUnimodularRepresentationIsRejected) {
  auto rep = examples::lambda_rep(2.0);
  EXPECT_FALSE(rep.unimodular);
  EXPECT_THROW(combinatorial_torsion(examples::circle(), rep), NotUnimodular);
}

TEST(Cellular, GroupMismatchIsRejected) {
  EXPECT_THROW(cochain_complex(examples::circle(), examples::lens_zeta(5)), ValidationError);
}

TEST(Cellular, RelationsAreChecked) {
  const PiSpec z5 = PiSpec::finite(Backend::cyclic_table(5));
  EXPECT_THROW(scalar_representation(z5, {{1, std::polar(1.0, 0.3)}}), ValidationError);
  EXPECT_NO_THROW(scalar_representation(z5, {{1, zeta(5, 2)}}));
}

TEST(Cellular, ZeroEulerCharacteristicIgnoresVolume) {
  Rng rng(61);
  auto rep = examples::lambda_rep(std::polar(1.0, 2.0));
  const double base = *combinatorial_torsion(examples::circle(), rep).log_scalar;
  for (int k = 0; k < 5; ++k) {
    const double t = uniform(rng, -3, 3);
    const DetLineElement s{{{"M", 1}}, t};
    EXPECT_NEAR(*combinatorial_torsion(examples::circle(), rep, s).log_scalar, base, 1e-10);
  }
}

TEST(Cellular, ReliftingCellsLeavesTorsionUnchanged) {
  Rng rng(62);
  CellComplex l = examples::lens(7, 2);
  auto rep = examples::lens_zeta(7, 3);
  const double base = *combinatorial_torsion(l, rep).log_scalar;
  for (int k = 0; k < 5; ++k) {
    CellComplex m = relift(l, l.cells[uniform_int(rng, 0, 3)].id, uniform_int(rng, 0, 6));
    EXPECT_NEAR(*combinatorial_torsion(m, rep).log_scalar, base, 1e-9);
  }
  CellComplex c = relift(examples::circle(), "e", -3);
  EXPECT_NEAR(*combinatorial_torsion(c, examples::lambda_rep(-1.0)).log_scalar, std::log(0.5), 1e-9);
}

TEST(Subdivision, CircleEdge) {
  CellComplex s = elementary_subdivision(examples::circle(), "e");
  EXPECT_EQ(s.cells_of_dim(0).size(), 2u);
  EXPECT_EQ(s.cells_of_dim(1).size(), 2u);
  EXPECT_EQ(s.euler_characteristic, 0);
  EXPECT_NEAR(*combinatorial_torsion(s, examples::lambda_rep(-1.0)).scalar_value(), 0.5, 1e-10);
}

TEST(Subdivision, BoundaryPattern) {
  Subdivision s = subdivide(examples::circle(), "e");
  const auto& dp = s.complex.boundary(s.plus);
  EXPECT_TRUE(std::any_of(dp.begin(), dp.end(), [&](const BoundaryTerm& t) {
    return t.face == s.mid && t.coeff == ring_monomial(0);
  }));
  EXPECT_THROW(subdivide(examples::circle(), "v"), Unsupported);
}

TEST(Subdivision, DisjointSubdivisionsCommute) {
  CellComplex t = examples::torus();
  CellComplex ab = elementary_subdivision(elementary_subdivision(t, "a"), "b");
  CellComplex ba = elementary_subdivision(elementary_subdivision(t, "b"), "a");
  std::set<std::string> ia, ib;
  for (const auto& c : ab.cells) ia.insert(c.id);
  for (const auto& c : ba.cells) ib.insert(c.id);
  EXPECT_EQ(ia, ib);
  for (const auto& id : ia) {
    auto x = ab.boundary(id), y = ba.boundary(id);
    auto key = [](std::vector<BoundaryTerm> v) {
      std::sort(v.begin(), v.end(), [](const auto& p, const auto& q) { return p.face < q.face; });
      return v;
    };
    x = key(x);
    y = key(y);
    ASSERT_EQ(x.size(), y.size()) << id;
    for (size_t m = 0; m < x.size(); ++m) {
      EXPECT_EQ(x[m].face, y[m].face);
      EXPECT_EQ(x[m].coeff, y[m].coeff);
    }
  }
}

TEST(Subdivision, InvarianceScalarCases) {
  auto c1 = subdivision_invariance_check(examples::circle(), examples::lambda_rep(-1.0), 3, 1);
  EXPECT_TRUE(c1.pass) << c1.max_defect;
  for (double v : c1.log_values) EXPECT_NEAR(v, std::log(0.5), 1e-9);
  auto c2 = subdivision_invariance_check(examples::lens(5, 1), examples::lens_zeta(5), 3, 2);
  EXPECT_TRUE(c2.pass) << c2.max_defect;
  auto c3 = subdivision_invariance_check(examples::circle(), examples::circle_regular(1024), 2, 3);
  EXPECT_TRUE(c3.pass) << c3.max_defect;
  auto c4 = subdivision_invariance_check(examples::torus(), examples::lambda_rep(std::polar(1.0, 0.4)), 3, 4);
  EXPECT_TRUE(c4.pass) << c4.max_defect;
}

TEST(Subdivision, InvarianceLineCase) {
  auto c = subdivision_invariance_check(examples::circle(), examples::trivial_circle(), 3, 5);
  EXPECT_TRUE(c.line_case);
  EXPECT_TRUE(c.pass) << c.max_defect;
  auto l = subdivision_invariance_check(examples::lens(5, 2), examples::lens_regular(5), 2, 6);
  EXPECT_TRUE(l.line_case);
  EXPECT_TRUE(l.pass) << l.max_defect;
}

TEST(Subdivision, CochainMapIsAChainMap) {
  Subdivision s = subdivide(examples::lens(5, 2), "e2");
  auto rep = examples::lens_regular(5);
  EXPECT_NO_THROW(subdivision_cochain_map(examples::lens(5, 2), s, rep));
}
