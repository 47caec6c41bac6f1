#pragma once

// Torsion of cochain complexes as an element of the determinant line of the
// extended cohomology, computed through the eps-spectral splitting.
//
// Frame labels used in results, for a complex with object labels C^i:
//   harm(C^i)      harmonic subspace of C^i (reduced cohomology)
//   clim(C^i)      closure of the image of d_i inside C^i
//   coim(C^i)      orthogonal complement of ker d_{i+1} inside C^i
// The torsion part T(H^i) = (d_i : coim(C^{i-1}) -> clim(C^i)) contributes
// (clim(C^i) (x) coim(C^{i-1})^*)^((-1)^i) to det H(C). Labels of objects
// with zero von Neumann dimension are omitted.
//
// Collapsing a tau-trivial torsion part of exponent e adds e * I_i to the
// log coefficient, where I_i = integral of ln(lambda) against the density of
// |d_i| (= 1/2 log Det(d_i* d_i) on the coimage). This is the normalization in
// which the acyclic torsion equals 1/2 sum (-1)^i i log Det(Delta_i).

#include <optional>
#include <string>
#include <vector>

#include "l2t/detline.hpp"
#include "l2t/extcoh.hpp"

namespace l2t {

struct TorsionOptions {
  double epsilon = 0;  // 0 selects the default split point
  double rank_tol = kDefaultRankTol;
  double agree_tol = 1e-8;
  LadderConfig ladder;
  bool require_scalar = false;  // throw when the scalar is unavailable
};

struct TorsionReport {
  double epsilon = 0;
  double epsilon_check = 0;
  DetLineElement rho_small;     // over the frames of the [0, eps] subcomplex
  double log_rho_large = 0;     // acyclic (eps, inf) subcomplex
  DetLineElement combined;      // over harm/clim/coim frames of the full complex
  std::vector<DetClassVerdict> detclass;  // per degree, first_degree..last_degree
  std::vector<double> betti;
  std::optional<DetLineElement> reduced;  // torsion parts collapsed (determinant class)
  std::optional<double> log_scalar;       // present when reduced is the scalar line
  bool eps_independence = true;
  bool formula_agreement = true;
  double eps_discrepancy = 0;
  double formula_discrepancy = 0;

  std::optional<double> scalar_value() const;
  bool determinant_class() const;
};

// The word prod (C^i)^((-1)^i) with coefficient log_coeff.
DetLineElement standard_volume(const ChainComplex& c, double log_coeff = 0);

// nu_C : det C -> det H(C), composed from the exact sequences
//   0 -> Z^i -> C^i -> coim(d_{i+1}) -> 0,   0 -> clim(d_i) -> Z^i -> harm -> 0.
DetLineElement nu_map(const ChainComplex& c, const DetLineElement& sigma,
                      double tol = kDefaultRankTol);

// 1/2 sum_i (-1)^i i log Det(Delta_i). Throws NotAcyclic.
double log_torsion_acyclic(const ChainComplex& c, double tol = kDefaultRankTol);
// 1/2 sum_i (-1)^i log Det(d_i* d_i | coim), i.e. sum_i (-1)^i I_i.
double log_torsion_rho_sig(const ChainComplex& c, double tol = kDefaultRankTol);

TorsionReport torsion(const ChainComplex& c, const DetLineElement& sigma,
                      const TorsionOptions& opt = {});
TorsionReport torsion(const ChainComplex& c, const TorsionOptions& opt = {});

// Log coefficient of the torsion collapsed onto harmonic frames, for a
// complex of determinant class with the standard volume. Throws
// NoCanonicalElement / VerdictInconclusive otherwise.
double reduced_log_torsion(const ChainComplex& c, double tol = kDefaultRankTol,
                           const LadderConfig& cfg = {});

// Isometric embeddings of the harmonic subspaces harm^i -> C^i, one per degree.
std::vector<Morphism> harmonic_frames(const ChainComplex& c, double tol = kDefaultRankTol);

// Chain maps are lists of per-degree morphisms f_i : C^i -> D^i over a
// common degree range.
using ChainMap = std::vector<Morphism>;
// Throws NotAChainMap.
void check_chain_map(const ChainComplex& c, const ChainComplex& d, const ChainMap& f,
                     double tol = 1e-9);

// Re-indexes c to start at new_first, multiplying differentials by sign.
ChainComplex reindex(const ChainComplex& c, int new_first, double sign = 1.0);
// Pads with zero objects so that the complex covers [first, last].
ChainComplex pad(const ChainComplex& c, int first, int last);
// Extends f (whose first component sits in degree f_first) by zero morphisms
// to a chain map between the padded complexes c and d.
ChainMap pad_map(const ChainMap& f, int f_first, const ChainComplex& c, const ChainComplex& d);
ChainComplex direct_sum(const ChainComplex& a, const ChainComplex& b);

// Result of comparing rho_M with delta(rho_L (x) rho_N) for an exact triple.
struct LesCheck {
  double log_rho_l = 0, log_rho_m = 0, log_rho_n = 0;  // reduced, standard volumes
  double compat = 0;         // coefficient making the volumes compatible
  double log_les_torsion = 0;
  double log_delta = 0;      // contribution of the cohomology sequence in harmonic frames
  double lhs = 0, rhs = 0;
  bool extended = false;     // no member is acyclic
  bool pass = false;
};

// 0 -> L -alpha-> M -beta-> N -> 0, all over the same degree range.
LesCheck les_connecting_iso(const ChainComplex& l, const ChainComplex& m, const ChainComplex& n,
                            const ChainMap& alpha, const ChainMap& beta,
                            double tol = kDefaultRankTol, double agree_tol = 1e-6);

// Cone^i = C^i (+) Ct^{i-1} with D_i = [[-d_i, 0], [f_{i-1}, dt_{i-1}]].
ChainComplex cone(const ChainComplex& c, const ChainComplex& ct, const ChainMap& f);

struct ConeCheck {
  double log_rho_f = 0;
  double predicted = 0;
  double log_rho_c = 0, log_rho_ct = 0;
  double shift_dual_defect = 0;  // |log rho(Ct[-1]) + log rho(Ct)|
  LesCheck les;
  bool pass = false;
};
ConeCheck cone_torsion_check(const ChainComplex& c, const ChainComplex& ct, const ChainMap& f,
                             double tol = kDefaultRankTol, double agree_tol = 1e-6);

}  // namespace l2t
