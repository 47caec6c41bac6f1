#pragma once

// Finite CW complexes with fundamental-group data, their cochain complexes
// with coefficients in a representation, and combinatorial torsion.
//
// Boundaries are stored for the cellular chain complex of the universal
// cover in chosen lifts: d(e) = sum_f a_ef f with a_ef in the group ring.
// Group elements are integer tokens: indices into the Cayley table for a
// finite group, exponents of t for the infinite cyclic group.
// The cochain differential C^{q-1} -> C^q has block (e, f) = rho(a_ef).

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "l2t/torsion.hpp"

namespace l2t {

struct PiSpec {
  bool infinite_cyclic = false;
  std::vector<std::vector<int>> table;  // finite group, identity at index 0

  static PiSpec integers() { return PiSpec{true, {}}; }
  static PiSpec finite(std::vector<std::vector<int>> table);
  int identity() const { return 0; }
  int multiply(int g, int h) const;
  int inverse(int g) const;
  bool same_as(const PiSpec& o) const;
};

struct Term {
  int g = 0;
  std::int64_t coeff = 0;
  bool operator==(const Term&) const = default;
};
// Sorted by token, no zero coefficients.
using RingElement = std::vector<Term>;

RingElement ring_normalize(RingElement a);
RingElement ring_add(const RingElement& a, const RingElement& b);
RingElement ring_scale(const RingElement& a, std::int64_t s);
RingElement ring_mul(const PiSpec& pi, const RingElement& a, const RingElement& b);
RingElement ring_monomial(int g, std::int64_t coeff = 1);

struct Cell {
  std::string id;
  int dim = 0;
};

struct BoundaryTerm {
  std::string face;
  RingElement coeff;
};

struct CellComplex {
  std::vector<Cell> cells;
  std::map<std::string, std::vector<BoundaryTerm>> boundaries;
  PiSpec pi;
  int euler_characteristic = 0;

  int dimension() const;
  const Cell& cell(const std::string& id) const;
  bool has_cell(const std::string& id) const;
  // Ids of q-cells in insertion order.
  std::vector<std::string> cells_of_dim(int q) const;
  const std::vector<BoundaryTerm>& boundary(const std::string& id) const;
};

// Throws ValidationError: duplicate ids, faces of the wrong dimension,
// d^2 != 0 over the group ring, chi mismatch.
void validate(const CellComplex& k);
int alternating_cell_count(const CellComplex& k);

struct Representation {
  PiSpec pi;
  HObject module;
  std::map<int, Morphism> generators;  // token -> image
  std::map<int, Morphism> images;      // every element, finite pi only
  bool unimodular = false;

  const BackendPtr& backend() const { return module.backend; }
  // rho(g) for a group element token.
  Morphism image(int g) const;
  Morphism evaluate(const RingElement& a) const;
};

// Validates relations (finite pi: images extended along the Cayley table,
// consistency to 1e-10) and computes the unimodular flag.
// Throws ValidationError, NotInvertible.
Representation make_representation(const PiSpec& pi, const HObject& module,
                                   std::map<int, Morphism> generators);
// Finite pi: the FiniteGroup backend on pi's table, g -> left multiplication.
// Infinite cyclic: the Family circle with grid n, t -> e^{i theta}.
Representation regular_representation(const PiSpec& pi, int grid = 4096);
// t or every generator -> the scalar z on a one-dimensional Matrix module.
Representation scalar_representation(const PiSpec& pi, const std::map<int, cplx>& generators);

// C^q = one copy of the module per q-cell, degrees 0..dim K.
ChainComplex cochain_complex(const CellComplex& k, const Representation& rep);

// sigma is an element of det M with the single frame label "M". The volume
// on C^*(K;M) is sigma^chi(K). Throws NotUnimodular, ValidationError.
TorsionReport combinatorial_torsion(const CellComplex& k, const Representation& rep,
                                    const DetLineElement& sigma, const TorsionOptions& opt = {});
TorsionReport combinatorial_torsion(const CellComplex& k, const Representation& rep,
                                    const TorsionOptions& opt = {});

// Replace the lift of cell e by g.e.
CellComplex relift(const CellComplex& k, const std::string& id, int g);

struct Subdivision {
  CellComplex complex;
  std::string cell, plus, minus, mid;  // e, e+, e-, e0
  std::vector<BoundaryTerm> b_part;    // d e = A + B, B kept here
};

// e -> e+, e-, e0 with d e+ = A + e0, d e- = B - e0, d e0 = -d A, where A
// is one monomial of d e (a negative one when available). Cells having e in
// their boundary get e+ + e-. Throws Unsupported for 0-cells.
Subdivision subdivide(const CellComplex& k, const std::string& id);
CellComplex elementary_subdivision(const CellComplex& k, const std::string& id);

// Cochain map C^*(K;M) -> C^*(K';M) dual to e+ -> e, e- -> 0, e0 -> B.
ChainMap subdivision_cochain_map(const CellComplex& k, const Subdivision& s,
                                 const Representation& rep);

struct SubdivisionCheck {
  std::vector<std::string> subdivided;  // cell ids in the order used
  std::vector<double> log_values;       // reduced log torsion after each round
  std::vector<double> predicted;        // expected value after each round
  double max_defect = 0;
  bool line_case = false;
  bool pass = false;
};
// depth rounds of elementary subdivisions of cells picked with the seed.
SubdivisionCheck subdivision_invariance_check(const CellComplex& k, const Representation& rep,
                                              int depth, std::uint64_t seed = 7,
                                              double tol = -1);

namespace examples {

// One vertex, one edge, d e = (t - 1) v.
CellComplex circle();
// Two vertices, two edges.
CellComplex circle_two_cells();
// The Z-cover of the torus along one generator: d a = (t-1) v, d b = 0, d F = (t-1) b.
CellComplex torus();
// Standard 4-cell structure; cochain differentials t-1, N, t^{q*}-1.
CellComplex lens(int p, int q);

Representation lambda_rep(cplx lambda);
Representation circle_regular(int grid = 4096);
Representation trivial_circle();
// generator -> exp(2 pi i k / p) on C.
Representation lens_zeta(int p, int k = 1);
Representation lens_regular(int p);

}  // namespace examples

}  // namespace l2t
