#include "l2t/detline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace l2t {

int DetLineElement::exponent_of(const std::string& label) const {
  int e = 0;
  for (const auto& f : frame)
    if (f.label == label) e += f.exponent;
  return e;
}

DetLineElement normalize(DetLineElement x) {
  std::vector<FrameFactor> out;
  for (const auto& f : x.frame) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const FrameFactor& g) { return g.label == f.label; });
    if (it == out.end())
      out.push_back(f);
    else
      it->exponent += f.exponent;
  }
  out.erase(std::remove_if(out.begin(), out.end(), [](const FrameFactor& f) { return f.exponent == 0; }),
            out.end());
  x.frame = std::move(out);
  return x;
}

DetLineElement scalar_element(double log_coeff) { return DetLineElement{{}, log_coeff}; }

DetLineElement tensor(const DetLineElement& x, const DetLineElement& y) {
  DetLineElement z = x;
  z.frame.insert(z.frame.end(), y.frame.begin(), y.frame.end());
  z.log_coeff += y.log_coeff;
  return normalize(std::move(z));
}

DetLineElement dual(const DetLineElement& x) {
  DetLineElement z = x;
  for (auto& f : z.frame) f.exponent = -f.exponent;
  z.log_coeff = -z.log_coeff;
  return z;
}

bool same_frame(const DetLineElement& x, const DetLineElement& y) {
  std::map<std::string, int> a, b;
  for (const auto& f : normalize(x).frame) a[f.label] = f.exponent;
  for (const auto& f : normalize(y).frame) b[f.label] = f.exponent;
  return a == b;
}

double log_ratio(const DetLineElement& x, const DetLineElement& y) {
  if (!same_frame(x, y))
    throw ValidationError("elements live on different frame words: " + describe(x) + " vs " +
                          describe(y));
  return x.log_coeff - y.log_coeff;
}

std::string describe(const DetLineElement& x) {
  std::ostringstream os;
  os << "exp(" << x.log_coeff << ")";
  if (x.frame.empty()) os << " [scalar]";
  for (const auto& f : x.frame) os << " [" << f.label << "]^" << f.exponent;
  return os.str();
}

DetLineElement element_from_product(const HObject& obj, const std::string& label) {
  check_product(obj);
  return DetLineElement{{FrameFactor{label, 1}}, 0.0};
}

namespace {

DetLineElement rename(DetLineElement x, const std::string& from, const std::string& to,
                      int& exponent) {
  exponent = x.exponent_of(from);
  if (exponent == 0) throw ValidationError("frame word has no factor '" + from + "'");
  for (auto& f : x.frame)
    if (f.label == from) f.label = to;
  return normalize(std::move(x));
}

}  // namespace

DetLineElement change_frame(const DetLineElement& x, const std::string& old_label,
                            const std::string& new_label, const Morphism& a) {
  int e = 0;
  DetLineElement y = rename(x, old_label, new_label, e);
  y.log_coeff += -0.5 * e * log_fk_det(a);
  return y;
}

DetLineElement change_frame(const DetLineElement& x, const std::string& old_label,
                            const HObject& old_product, const std::string& new_label,
                            const HObject& new_product) {
  if (!old_product.same_shape(new_product)) throw ShapeError("products live on different objects");
  Morphism a{with_standard_product(new_product), with_standard_product(new_product), {}};
  for (int j = 0; j < old_product.fibers(); ++j) {
    Eigen::LDLT<Mat> ldlt(new_product.product_at(j));
    a.fibers.push_back(ldlt.solve(old_product.product_at(j)));
  }
  return change_frame(x, old_label, new_label, a);
}

DetLineElement push_forward(const Morphism& f, const DetLineElement& x,
                            const std::string& source_label, const std::string& target_label,
                            double tol) {
  int e = 0;
  DetLineElement y = rename(x, source_label, target_label, e);
  y.log_coeff += e * log_fk_det(f, tol);
  return y;
}

namespace {

Mat orthonormal_image(const Mat& a, double tol) {
  if (a.rows() == 0 || a.cols() == 0) return Mat::Zero(a.rows(), 0);
  Eigen::BDCSVD<Mat> svd(a, Eigen::ComputeFullU);
  return svd.matrixU().leftCols(fiber_rank(svd.singularValues(), tol));
}

Mat orthonormal_kernel(const Mat& a, double tol) {
  const int n = static_cast<int>(a.cols());
  if (a.rows() == 0 || n == 0) return Mat::Identity(n, n);
  Eigen::BDCSVD<Mat> svd(a, Eigen::ComputeFullV);
  int r = fiber_rank(svd.singularValues(), tol);
  return svd.matrixV().rightCols(n - r);
}

}  // namespace

ExactnessReport check_exact(const Morphism& alpha, const Morphism& beta, double tol) {
  check_shape(alpha);
  check_shape(beta);
  if (!alpha.target.same_shape(beta.source)) throw ShapeError("alpha and beta are not composable");
  ExactnessReport r;
  r.injective = true;
  r.surjective = true;
  for (int j = 0; j < alpha.fiber_count(); ++j) {
    const Mat a = standard_fiber(alpha, j), b = standard_fiber(beta, j);
    const Mat qa = orthonormal_image(a, tol), qk = orthonormal_kernel(b, tol);
    if (qa.cols() != a.cols()) r.injective = false;
    if (b.rows() - orthonormal_image(b, tol).cols() != 0) r.surjective = false;
    if (qa.cols() != qk.cols()) {
      r.gap = std::max(r.gap, 1.0);
      continue;
    }
    const Mat d = qa * qa.adjoint() - qk * qk.adjoint();
    if (d.size()) r.gap = std::max(r.gap, d.norm());
  }
  return r;
}

double exact_sequence_log_coeff(const Morphism& alpha, const Morphism& beta, double tol,
                                double gap_tol) {
  ExactnessReport r = check_exact(alpha, beta, tol);
  if (!r.exact(gap_tol))
    throw NotExact(std::string("sequence is not exact (") + (r.injective ? "" : "alpha not injective; ") +
                   (r.surjective ? "" : "beta not surjective; ") + "gap " + std::to_string(r.gap) + ")");
  return -log_det_restricted(alpha, tol) + log_det_restricted(beta, tol);
}

DetLineElement exact_sequence_iso(const Morphism& alpha, const Morphism& beta,
                                  const DetLineElement& x, const std::string& m_label,
                                  const std::string& sub_label, const std::string& quot_label,
                                  double tol, double gap_tol) {
  const double c = exact_sequence_log_coeff(alpha, beta, tol, gap_tol);
  const int e = x.exponent_of(m_label);
  if (e == 0) throw ValidationError("frame word has no factor '" + m_label + "'");
  DetLineElement y;
  y.log_coeff = x.log_coeff + e * c;
  for (const auto& f : x.frame) {
    if (f.label == m_label) {
      y.frame.push_back({sub_label, f.exponent});
      y.frame.push_back({quot_label, f.exponent});
    } else {
      y.frame.push_back(f);
    }
  }
  return normalize(std::move(y));
}

DetLineElement canonical_trivialization(const Morphism& alpha, const std::string& a_label,
                                        const std::string& a_prime_label, double tol,
                                        const LadderConfig& cfg) {
  KernelImage ki = kernel_and_image_closure(alpha, tol);
  if (!ki.kernel.is_zero()) throw NotInjective("torsion object map is not injective");
  for (int j = 0; j < alpha.fiber_count(); ++j)
    if (ki.image.dims[j] != alpha.target.dims[j])
      throw ValidationError("object has a projective part; no canonical element");
  DetClassVerdict v = tau_isomorphism_test(alpha, tol, cfg);
  if (v.status == VerdictStatus::Divergent)
    throw NoCanonicalElement("torsion object is not tau-trivial: " + v.diagnostic);
  if (v.status == VerdictStatus::Inconclusive)
    throw VerdictInconclusive("tau-triviality undecided: " + v.diagnostic);
  DetLineElement k;
  k.frame = {{a_label, 1}, {a_prime_label, -1}};
  k.log_coeff = v.log_integral;
  return normalize(std::move(k));
}

}  // namespace l2t
