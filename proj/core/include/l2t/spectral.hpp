#pragma once

// Spectral density functions, Fuglede-Kadison determinants and the
// determinant-class verdict for injective maps with dense image.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "l2t/category.hpp"

namespace l2t {

// phi(lambda) = zero_mass + sum of masses at breakpoints <= lambda.
struct SpectralDensity {
  std::vector<std::pair<double, double>> breakpoints;  // (lambda > 0, mass), ascending
  double zero_mass = 0;

  double operator()(double lambda) const;
  double total_mass() const;
  double positive_mass() const { return total_mass() - zero_mass; }
  // Integral of ln(lambda) d phi over lambda > above.
  double log_integral(double above = 0) const;
  double smallest_positive() const;
  double largest() const;
  bool empty() const { return breakpoints.empty(); }
};

// Builds a density from weighted eigenvalue lists. Values <= zero_tol count
// as kernel; the sort is stable so ties keep fiber order.
SpectralDensity make_density(const std::vector<std::pair<double, double>>& values,
                             double zero_tol);

// Density of a nonnegative self-adjoint endomorphism (self-adjoint for its
// object's product). Throws NotSelfAdjoint.
SpectralDensity spectral_density(const Morphism& m, double tol = kDefaultRankTol);

// Density of |a| = (a*a)^{1/2}, built from singular values. Singular values
// below tol times the fiber's largest one count as kernel.
SpectralDensity singular_density(const Morphism& a, double tol = kDefaultRankTol);

enum class VerdictStatus { Convergent, Divergent, Inconclusive };
const char* to_string(VerdictStatus s);

struct LadderConfig {
  int rungs = 12;              // eps_m = 10^-m, m = 1..rungs
  int window = 4;              // rungs inspected for the certificate
  double slack = 0.5;          // nats
  double converge_tol = 1e-3;  // nats
};

struct DetClassVerdict {
  VerdictStatus status = VerdictStatus::Convergent;
  // Integral of ln(lambda) against the density of |alpha|; -infinity when Divergent.
  double log_integral = 0;
  std::optional<double> ns_exponent;
  std::vector<std::pair<double, double>> ladder;  // (eps, I(eps))
  std::vector<double> tail_bound;                 // ln(1/eps) * (phi(eps) - phi(0))
  std::string diagnostic;

  bool convergent() const { return status == VerdictStatus::Convergent; }
};

// Three-state classification of the integral of ln(lambda) near 0.
// finite_spectrum short-circuits to Convergent (Matrix and FiniteGroup).
DetClassVerdict classify_density(const SpectralDensity& d, bool finite_spectrum,
                                 const LadderConfig& cfg = {});

// log Det_tau(a) for invertible a. Throws NotInvertible.
double log_fk_det(const Morphism& a, double tol = kDefaultRankTol);

// Extended determinant of an injective map: integral of ln(lambda) against
// the density of |alpha|, with the divergence verdict. Throws NotInjective.
struct ExtendedDet {
  double log_det;  // -infinity unless Convergent
  DetClassVerdict verdict;
};
ExtendedDet fk_det_extended(const Morphism& alpha, double tol = kDefaultRankTol,
                            const LadderConfig& cfg = {});

// Injective, dense image, and convergent log integral.
DetClassVerdict tau_isomorphism_test(const Morphism& alpha, double tol = kDefaultRankTol,
                                     const LadderConfig& cfg = {});

// Least-squares slope of log(phi(lambda) - phi(0)) against log(lambda) over
// the lowest decades carrying mass. Empty when the mass does not reach near 0
// or too few points are available.
std::optional<double> ns_exponent(const SpectralDensity& d, int decades = 3,
                                  int min_points = 4);

// log Det_tau for a positive definite endomorphism via its eigenvalues.
double log_det_positive(const Morphism& a, double tol = kDefaultRankTol);

// Sum over fibers of weight * sum ln(singular value), restricted to the
// nonzero singular values. This is the integral of ln(lambda) d phi_{|a|}.
double log_det_restricted(const Morphism& a, double tol = kDefaultRankTol);

}  // namespace l2t
