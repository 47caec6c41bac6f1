#pragma once

// Objects of the extended category, chain complexes and their extended
// cohomology, determinant lines of extended objects.

#include <optional>
#include <string>
#include <vector>

#include "l2t/detline.hpp"
#include "l2t/spectral.hpp"

namespace l2t {

// X = (alpha: A' -> A) with the kernel of alpha quotiented out.
struct ExtendedObject {
  Morphism original;        // alpha as given
  Morphism alpha;           // alpha restricted to A'/ker alpha (orthonormal frame)
  Morphism coim_frame;      // A'/ker alpha -> A', isometric
  Morphism image_frame;     // cl(im alpha) -> A, isometric
  Morphism torsion_alpha;   // alpha as a map A'/ker -> cl(im alpha), orthonormal coordinates
  double projective_dim = 0;  // dim_tau of A / cl(im alpha)
  SpectralDensity torsion_density;  // density of |alpha| on the torsion part
  DetClassVerdict verdict;

  bool is_projective() const { return torsion_alpha.source.is_zero(); }
  bool is_torsion() const { return projective_dim == 0; }
  bool is_trivial() const { return is_torsion() && verdict.convergent(); }
};

ExtendedObject extended_object(const Morphism& alpha, double tol = kDefaultRankTol,
                               const LadderConfig& cfg = {});

// det X = det A (x) (det A'/ker alpha)^*. The trivialized form is present
// when X is torsion and tau-trivial; it then is the scalar line.
struct ExtendedLine {
  DetLineElement word;
  std::optional<DetLineElement> canonical;  // canonical element of word, when it exists
  std::string note;
};
ExtendedLine det_line_of_extended(const ExtendedObject& x, const std::string& a_label,
                                  const std::string& a_prime_label, double tol = kDefaultRankTol,
                                  const LadderConfig& cfg = {});

// Canonical element for a tau-trivial torsion object.
DetLineElement canonical_trivialization(const ExtendedObject& x, const std::string& a_label,
                                        const std::string& a_prime_label,
                                        double tol = kDefaultRankTol,
                                        const LadderConfig& cfg = {});

// Push-forward along [f]: X -> Y given by f: A -> B and f': A' -> B' with
// f alpha = beta f'. x lives on det A (x) det A'^* (labels given); the
// result lives on det B (x) det B'^*. Throws NotAnIsomorphism.
DetLineElement extended_pushforward(const Morphism& alpha, const Morphism& beta,
                                    const Morphism& f, const Morphism& f_prime,
                                    const DetLineElement& x, const std::string& a_label,
                                    const std::string& a_prime_label, const std::string& b_label,
                                    const std::string& b_prime_label, double tol = kDefaultRankTol);

// Kernel and cokernel of [f] for injective alpha, beta:
//   coker [f] = ((beta, -f): B' (+) A -> B)
//   ker [f]   = (iota: A' -> P), P = ker(beta, -f), iota(a') = (f'(a'), alpha(a')).
// log_coeff is the coefficient of the canonical isomorphism
// det Y (x) det X^* -> det coker (x) det ker^* relative to the declared frames
// on A, A', B, B' and the frames induced on P and on (B' (+) A)/P.
struct KernelCokernel {
  Morphism coker_map;   // (beta, -f): B' (+) A -> B
  Morphism ker_map;     // iota: A' -> P (P with induced orthonormal frame)
  Morphism p_frame;     // P -> B' (+) A, isometric
  Morphism quotient_frame;  // (B' (+) A)/P -> B' (+) A, isometric
  ExtendedObject coker;
  ExtendedObject ker;
  double log_coeff = 0;
};
KernelCokernel kernel_cokernel_lines(const Morphism& alpha, const Morphism& beta,
                                     const Morphism& f, const Morphism& f_prime,
                                     double tol = kDefaultRankTol);

// Cochain complex C^first -> ... with differentials d_i : C^{i-1} -> C^i.
struct ChainComplex {
  int first_degree = 0;
  std::vector<HObject> objects;
  std::vector<Morphism> differentials;  // differentials[k] : objects[k] -> objects[k+1]
  std::vector<std::string> labels;      // frame labels of the objects (default "C^i")

  int size() const { return static_cast<int>(objects.size()); }
  int last_degree() const { return first_degree + size() - 1; }
  const HObject& at(int degree) const { return objects[degree - first_degree]; }
  // Differential into `degree` (d_degree : C^{degree-1} -> C^degree), or null.
  const Morphism* into(int degree) const;
  const Morphism* out_of(int degree) const;
  std::string label(int degree) const;
  const BackendPtr& backend() const { return objects.front().backend; }
};

// Builds a complex from differentials; labels default to "C^i". Validates shapes.
ChainComplex make_complex(std::vector<HObject> objects, std::vector<Morphism> differentials,
                          int first_degree = 0);
// Throws ValidationError on shape problems and when d^2 != 0.
void validate(const ChainComplex& c, double tol = 1e-10);
double d_squared_defect(const ChainComplex& c);
// Replaces differential fibers that are negligible (norm <= tol times the
// largest differential norm in the same fiber) by exact zeros.
ChainComplex drop_negligible(const ChainComplex& c, double tol = kDefaultRankTol);

// Laplacian d d* + d* d in the given degree.
Morphism laplacian(const ChainComplex& c, int degree);

struct DegreeCohomology {
  int degree = 0;
  double betti = 0;               // dim_tau ker Delta_i
  double betti_from_ranks = 0;    // dim_tau ker d_{i+1} - dim_tau cl(im d_i)
  SpectralDensity torsion_density;  // density of |d_i| on coim d_i
  DetClassVerdict verdict;        // tau-triviality of the torsion part
  std::optional<double> ns_exponent;
};

struct CohomologyProfile {
  std::vector<DegreeCohomology> degrees;
  bool determinant_class() const;
  bool reduced_vanishes(double tol = 1e-9) const;
};

CohomologyProfile cohomology(const ChainComplex& c, double tol = kDefaultRankTol,
                             const LadderConfig& cfg = {});
std::vector<DetClassVerdict> determinant_class_test(const ChainComplex& c,
                                                    double tol = kDefaultRankTol,
                                                    const LadderConfig& cfg = {});

}  // namespace l2t
