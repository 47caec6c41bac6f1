#include "l2t/extcoh.hpp"

#include "detail.hpp"

#include <algorithm>
#include <cmath>

namespace l2t {

namespace {

using detail::FiberSplit;
using detail::declared_frame;
using detail::split_fiber;

bool finite_spectrum(const BackendPtr& b) { return b->kind() != BackendKind::Family; }

}  // namespace

ExtendedObject extended_object(const Morphism& alpha, double tol, const LadderConfig& cfg) {
  check_shape(alpha);
  ExtendedObject x;
  x.original = alpha;
  const auto& b = alpha.backend();
  std::vector<int> rdims;
  std::vector<Mat> coim_f, img_f, tors;
  std::vector<std::pair<double, double>> vals;
  for (int j = 0; j < alpha.fiber_count(); ++j) {
    FiberSplit s = split_fiber(standard_fiber(alpha, j), tol);
    const int r = static_cast<int>(s.sv.size());
    rdims.push_back(r);
    coim_f.push_back(declared_frame(alpha.source, j, s.coim));
    img_f.push_back(declared_frame(alpha.target, j, s.image));
    Mat t = Mat::Zero(r, r);
    for (int k = 0; k < r; ++k) {
      t(k, k) = s.sv(k);
      vals.emplace_back(s.sv(k), b->fiber_weight(j));
    }
    tors.push_back(std::move(t));
  }
  HObject r_obj = HObject::fibered(b, rdims);
  x.coim_frame = Morphism{r_obj, alpha.source, std::move(coim_f)};
  x.image_frame = Morphism{r_obj, alpha.target, std::move(img_f)};
  x.alpha = compose(alpha, x.coim_frame);
  x.torsion_alpha = Morphism{r_obj, r_obj, std::move(tors)};
  x.projective_dim = alpha.target.dim_tau() - r_obj.dim_tau();
  if (std::abs(x.projective_dim) < 1e-12 * std::max(1.0, alpha.target.dim_tau())) x.projective_dim = 0;
  x.torsion_density = make_density(vals, 0.0);
  x.verdict = classify_density(x.torsion_density, finite_spectrum(b), cfg);
  return x;
}

ExtendedLine det_line_of_extended(const ExtendedObject& x, const std::string& a_label,
                                  const std::string& a_prime_label, double tol,
                                  const LadderConfig& cfg) {
  ExtendedLine out;
  const bool has_kernel = x.original.source.dim_tau() > x.alpha.source.dim_tau() + 1e-12;
  const std::string quot = has_kernel ? a_prime_label + "/ker" : a_prime_label;
  out.word.frame.push_back({a_label, 1});
  if (!x.is_projective()) out.word.frame.push_back({quot, -1});
  if (x.is_projective()) {
    out.note = "projective object: line is det " + a_label;
    return out;
  }
  if (!x.is_torsion()) {
    out.note = "object has a projective part of dimension " + std::to_string(x.projective_dim);
    return out;
  }
  switch (x.verdict.status) {
    case VerdictStatus::Convergent:
      out.canonical = canonical_trivialization(x, a_label, quot, tol, cfg);
      out.note = "tau-trivial torsion object";
      break;
    case VerdictStatus::Divergent:
      out.note = "torsion object is not tau-trivial; frame word retained";
      break;
    case VerdictStatus::Inconclusive:
      out.note = "tau-triviality inconclusive; frame word retained";
      break;
  }
  return out;
}

DetLineElement canonical_trivialization(const ExtendedObject& x, const std::string& a_label,
                                        const std::string& a_prime_label, double tol,
                                        const LadderConfig& cfg) {
  if (!x.is_torsion()) throw ValidationError("object has a projective part; no canonical element");
  if (x.verdict.status == VerdictStatus::Divergent)
    throw NoCanonicalElement("torsion object is not tau-trivial: " + x.verdict.diagnostic);
  if (x.verdict.status == VerdictStatus::Inconclusive)
    throw VerdictInconclusive("tau-triviality undecided: " + x.verdict.diagnostic);
  (void)tol;
  (void)cfg;
  DetLineElement k;
  k.frame = {{a_label, 1}, {a_prime_label, -1}};
  k.log_coeff = x.verdict.log_integral;
  return normalize(std::move(k));
}

namespace {

void check_commutes(const Morphism& alpha, const Morphism& beta, const Morphism& f,
                    const Morphism& f_prime) {
  Morphism lhs = compose(f, alpha), rhs = compose(beta, f_prime);
  if (!approx_equal(lhs, rhs, 1e-8))
    throw ValidationError("f alpha != beta f' : not a morphism of extended objects");
}

}  // namespace

DetLineElement extended_pushforward(const Morphism& alpha, const Morphism& beta,
                                    const Morphism& f, const Morphism& f_prime,
                                    const DetLineElement& x, const std::string& a_label,
                                    const std::string& a_prime_label, const std::string& b_label,
                                    const std::string& b_prime_label, double tol) {
  check_commutes(alpha, beta, f, f_prime);
  const Morphism iota = to_standard(vstack(f_prime, alpha));      // A' -> B' (+) A
  const Morphism pi = to_standard(hstack(beta, scaled(f, -1.0)));  // B' (+) A -> B

  const auto& b = alpha.backend();
  double log_iota = 0, log_g = 0;
  for (int j = 0; j < iota.fiber_count(); ++j) {
    FiberSplit si = split_fiber(iota.fibers[j], tol);
    if (si.sv.size() != iota.fibers[j].cols())
      throw NotAnIsomorphism("(f', alpha) is not injective in fiber " + std::to_string(j));
    // W = orthogonal complement of im iota.
    const Mat w = si.coker;
    const Mat g = pi.fibers[j] * w;
    if (g.rows() != g.cols())
      throw NotAnIsomorphism("cone sequence is not exact in fiber " + std::to_string(j));
    FiberSplit sg = split_fiber(g, tol);
    if (sg.sv.size() != g.rows())
      throw NotAnIsomorphism("(beta, -f) restricted to the complement is not injective with dense image");
    const Mat leak = pi.fibers[j] * si.image;
    if (leak.size() && leak.norm() > 1e-8 * std::max(1.0, pi.fibers[j].norm()))
      throw NotAnIsomorphism("image of (f', alpha) is not in the kernel of (beta, -f)");
    const double wj = b->fiber_weight(j);
    for (int k = 0; k < si.sv.size(); ++k) log_iota += wj * std::log(si.sv(k));
    for (int k = 0; k < sg.sv.size(); ++k) log_g += wj * std::log(sg.sv(k));
  }

  const int e = x.exponent_of(a_label);
  const int ep = x.exponent_of(a_prime_label);
  if (e == 0) throw ValidationError("element has no factor '" + a_label + "'");
  if (!alpha.source.is_zero() && ep != -e)
    throw ValidationError("element is not on det A (x) det A'^*");

  DetLineElement y;
  for (const auto& fct : x.frame) {
    if (fct.label == a_label)
      y.frame.push_back({b_label, fct.exponent});
    else if (fct.label == a_prime_label)
      ;
    else
      y.frame.push_back(fct);
  }
  if (!beta.source.is_zero()) y.frame.push_back({b_prime_label, -e});
  y.log_coeff = x.log_coeff + e * (-log_iota + log_g);
  return normalize(std::move(y));
}

KernelCokernel kernel_cokernel_lines(const Morphism& alpha, const Morphism& beta,
                                     const Morphism& f, const Morphism& f_prime, double tol) {
  check_commutes(alpha, beta, f, f_prime);
  KernelCokernel out;
  out.coker_map = hstack(beta, scaled(f, -1.0));
  const HObject& total = out.coker_map.source;
  const auto& b = alpha.backend();
  std::vector<int> pd, qd;
  std::vector<Mat> pf, qf;
  for (int j = 0; j < out.coker_map.fiber_count(); ++j) {
    FiberSplit s = split_fiber(standard_fiber(out.coker_map, j), tol);
    pd.push_back(static_cast<int>(s.ker.cols()));
    qd.push_back(static_cast<int>(s.coim.cols()));
    pf.push_back(declared_frame(total, j, s.ker));
    qf.push_back(declared_frame(total, j, s.coim));
  }
  HObject p = HObject::fibered(b, pd), q = HObject::fibered(b, qd);
  out.p_frame = Morphism{p, total, std::move(pf)};
  out.quotient_frame = Morphism{q, total, std::move(qf)};
  out.ker_map = compose(adjoint(out.p_frame), vstack(f_prime, alpha));
  out.coker = extended_object(out.coker_map, tol);
  out.ker = extended_object(out.ker_map, tol);
  // det(B' (+) A) = det P (x) det Q with the induced frames.
  const double c = exact_sequence_log_coeff(out.p_frame, adjoint(out.quotient_frame), tol);
  out.log_coeff = -c;
  return out;
}

// ---------------------------------------------------------------- complexes

const Morphism* ChainComplex::into(int degree) const {
  const int k = degree - first_degree;
  if (k < 1 || k >= size()) return nullptr;
  return &differentials[k - 1];
}

const Morphism* ChainComplex::out_of(int degree) const {
  const int k = degree - first_degree;
  if (k < 0 || k + 1 >= size()) return nullptr;
  return &differentials[k];
}

std::string ChainComplex::label(int degree) const {
  const int k = degree - first_degree;
  if (k >= 0 && k < static_cast<int>(labels.size()) && !labels[k].empty()) return labels[k];
  return "C^" + std::to_string(degree);
}

ChainComplex make_complex(std::vector<HObject> objects, std::vector<Morphism> differentials,
                          int first_degree) {
  ChainComplex c;
  c.first_degree = first_degree;
  c.objects = std::move(objects);
  c.differentials = std::move(differentials);
  if (c.objects.empty()) throw ValidationError("complex has no objects");
  if (c.differentials.size() + 1 != c.objects.size())
    throw ValidationError("a complex with n objects needs n-1 differentials");
  for (int d = c.first_degree; d <= c.last_degree(); ++d) c.labels.push_back("C^" + std::to_string(d));
  for (size_t k = 0; k < c.differentials.size(); ++k) {
    check_shape(c.differentials[k]);
    if (!c.differentials[k].source.same_shape(c.objects[k]) ||
        !c.differentials[k].target.same_shape(c.objects[k + 1]))
      throw ValidationError("differential " + std::to_string(k + c.first_degree + 1) +
                            " does not match the objects");
    // Objects carry the products; differentials see the same ones.
    c.differentials[k].source = c.objects[k];
    c.differentials[k].target = c.objects[k + 1];
  }
  return c;
}

double d_squared_defect(const ChainComplex& c) {
  double worst = 0, scale = 0;
  for (const auto& d : c.differentials)
    for (const auto& f : d.fibers) scale = std::max(scale, f.norm());
  const double floor = 1e-13 * scale;
  for (size_t k = 0; k + 1 < c.differentials.size(); ++k) {
    const Morphism& a = c.differentials[k];
    const Morphism& b = c.differentials[k + 1];
    for (int j = 0; j < a.fiber_count(); ++j) {
      const double na = a.fibers[j].norm(), nb = b.fibers[j].norm();
      if (na <= floor || nb <= floor) continue;
      const Mat p = b.fibers[j] * a.fibers[j];
      if (p.size()) worst = std::max(worst, p.norm() / (na * nb));
    }
  }
  return worst;
}

namespace {

// Largest entry modulus; unlike norm() it does not underflow for tiny fibers.
double max_entry(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

ChainComplex drop_negligible(const ChainComplex& c, double tol) {
  ChainComplex out = c;
  const int nf = c.backend()->fiber_count();
  for (int j = 0; j < nf; ++j) {
    std::vector<double> size;
    for (const auto& d : c.differentials) size.push_back(max_entry(standard_fiber(d, j)));
    const double scale = size.empty() ? 0.0 : *std::max_element(size.begin(), size.end());
    for (size_t k = 0; k < size.size(); ++k)
      if (size[k] > 0 && size[k] <= tol * scale) out.differentials[k].fibers[j].setZero();
  }
  return out;
}

void validate(const ChainComplex& c, double tol) {
  if (c.objects.empty()) throw ValidationError("complex has no objects");
  for (const auto& o : c.objects) check_product(o);
  const double defect = d_squared_defect(c);
  if (defect > tol)
    throw ValidationError("d^2 != 0 (relative defect " + std::to_string(defect) + ")");
}

Morphism laplacian(const ChainComplex& c, int degree) {
  const HObject& x = c.at(degree);
  Morphism lap = zero_morphism(x, x);
  if (const Morphism* d = c.into(degree)) lap = add(lap, compose(*d, adjoint(*d)));
  if (const Morphism* d = c.out_of(degree)) lap = add(lap, compose(adjoint(*d), *d));
  return lap;
}

bool CohomologyProfile::determinant_class() const {
  return std::all_of(degrees.begin(), degrees.end(),
                     [](const DegreeCohomology& d) { return d.verdict.convergent(); });
}

bool CohomologyProfile::reduced_vanishes(double tol) const {
  return std::all_of(degrees.begin(), degrees.end(),
                     [&](const DegreeCohomology& d) { return std::abs(d.betti) <= tol; });
}

CohomologyProfile cohomology(const ChainComplex& input, double tol, const LadderConfig& cfg) {
  validate(input);
  const ChainComplex c = drop_negligible(input, tol);
  CohomologyProfile prof;
  const auto& b = c.backend();
  for (int i = c.first_degree; i <= c.last_degree(); ++i) {
    DegreeCohomology dc;
    dc.degree = i;
    const Morphism lap = laplacian(c, i);
    const HObject& x = c.at(i);
    for (int j = 0; j < x.fibers(); ++j) {
      const Mat s = standard_fiber(lap, j);
      if (s.rows() == 0) continue;
      Eigen::SelfAdjointEigenSolver<Mat> es(s, Eigen::EigenvaluesOnly);
      const Eigen::VectorXd ev = es.eigenvalues();
      const double top = ev.cwiseAbs().maxCoeff();
      int k0 = 0;
      for (int k = 0; k < ev.size(); ++k)
        if (ev(k) <= tol * top || top == 0) ++k0;
      dc.betti += b->fiber_weight(j) * k0;
    }
    double ker_out = x.dim_tau(), rank_in = 0;
    if (const Morphism* d = c.out_of(i)) ker_out = kernel_and_image_closure(*d, tol).kernel.dim_tau();
    std::vector<std::pair<double, double>> vals;
    if (const Morphism* d = c.into(i)) {
      KernelImage ki = kernel_and_image_closure(*d, tol);
      rank_in = ki.image.dim_tau();
      for (int j = 0; j < d->fiber_count(); ++j)
        for (int k = 0; k < ki.image.dims[j]; ++k)
          vals.emplace_back(ki.singular_values[j](k), b->fiber_weight(j));
    }
    dc.betti_from_ranks = ker_out - rank_in;
    dc.torsion_density = make_density(vals, 0.0);
    dc.verdict = classify_density(dc.torsion_density, finite_spectrum(b), cfg);
    dc.ns_exponent = dc.verdict.ns_exponent;
    prof.degrees.push_back(std::move(dc));
  }
  return prof;
}

std::vector<DetClassVerdict> determinant_class_test(const ChainComplex& c, double tol,
                                                    const LadderConfig& cfg) {
  std::vector<DetClassVerdict> out;
  for (auto& d : cohomology(c, tol, cfg).degrees) out.push_back(std::move(d.verdict));
  return out;
}

}  // namespace l2t
