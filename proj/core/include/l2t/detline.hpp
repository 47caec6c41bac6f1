#pragma once

// Determinant lines as (frame word, log coefficient) pairs.
//
// A frame is the class of an admissible scalar product on a named object.
// A word is a product of frames with exponents +1 (the line) or -1 (its dual).
// The element exp(log_coeff) * word is always positively oriented.

#include <string>
#include <vector>

#include "l2t/category.hpp"
#include "l2t/spectral.hpp"

namespace l2t {

struct FrameFactor {
  std::string label;
  int exponent = 1;
  bool operator==(const FrameFactor&) const = default;
};

struct DetLineElement {
  std::vector<FrameFactor> frame;
  double log_coeff = 0;

  bool is_scalar() const { return frame.empty(); }
  int exponent_of(const std::string& label) const;
};

// Merges repeated labels, drops zero exponents; keeps first-appearance order.
DetLineElement normalize(DetLineElement x);
DetLineElement scalar_element(double log_coeff);
DetLineElement tensor(const DetLineElement& x, const DetLineElement& y);
DetLineElement dual(const DetLineElement& x);
// Same frame word (as a multiset of labels with exponents).
bool same_frame(const DetLineElement& x, const DetLineElement& y);
// log(x / y) for elements over the same frame word. Throws ValidationError.
double log_ratio(const DetLineElement& x, const DetLineElement& y);
std::string describe(const DetLineElement& x);

// The class of the object's own scalar product, coefficient 0.
DetLineElement element_from_product(const HObject& obj, const std::string& label);

// Re-expresses the factor `old_label` through `new_label`, where the two
// products on the same object satisfy <v,w>_old = <A v, w>_new. Then
// <,>_old = Det(A)^{-1/2} <,>_new.
DetLineElement change_frame(const DetLineElement& x, const std::string& old_label,
                            const std::string& new_label, const Morphism& a);
// Same, with A = P_new^{-1} P_old computed from two products of one object.
DetLineElement change_frame(const DetLineElement& x, const std::string& old_label,
                            const HObject& old_product, const std::string& new_label,
                            const HObject& new_product);

// Push-forward along an invertible f: f_* <,>_M = sqrt(Det(f f*)) <,>_N.
DetLineElement push_forward(const Morphism& f, const DetLineElement& x,
                            const std::string& source_label, const std::string& target_label,
                            double tol = kDefaultRankTol);

// Exactness data of 0 -> M' -alpha-> M -beta-> M'' -> 0.
struct ExactnessReport {
  bool injective = false;
  bool surjective = false;
  double gap = 0;  // distance between ker beta and im alpha as projections
  bool exact(double gap_tol = 1e-8) const { return injective && surjective && gap < gap_tol; }
};
ExactnessReport check_exact(const Morphism& alpha, const Morphism& beta,
                            double tol = kDefaultRankTol);

// psi_{alpha,beta}: det M -> det M' (x) det M''. The factor `m_label` of x is
// replaced by the induced frames (product on M' through alpha, on M'' through
// the orthogonal splitting) and the result is expressed in the declared
// products of M' and M''. Throws NotExact.
DetLineElement exact_sequence_iso(const Morphism& alpha, const Morphism& beta,
                                  const DetLineElement& x, const std::string& m_label,
                                  const std::string& sub_label, const std::string& quot_label,
                                  double tol = kDefaultRankTol, double gap_tol = 1e-8);
// Coefficient added to an exponent-+1 factor by psi_{alpha,beta}.
double exact_sequence_log_coeff(const Morphism& alpha, const Morphism& beta,
                                double tol = kDefaultRankTol, double gap_tol = 1e-8);

// Canonical element of det(A) (x) det(A')^* for a torsion object alpha: A' -> A
// that is tau-trivial: sqrt(Det(alpha* alpha)) in the declared frames.
// Throws NoCanonicalElement (Divergent), VerdictInconclusive, NotInjective.
DetLineElement canonical_trivialization(const Morphism& alpha, const std::string& a_label,
                                        const std::string& a_prime_label,
                                        double tol = kDefaultRankTol,
                                        const LadderConfig& cfg = {});

}  // namespace l2t
