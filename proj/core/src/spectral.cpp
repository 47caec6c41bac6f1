#include "l2t/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace l2t {

const char* to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::Convergent: return "Convergent";
    case VerdictStatus::Divergent: return "Divergent";
    case VerdictStatus::Inconclusive: return "Inconclusive";
  }
  return "?";
}

double SpectralDensity::operator()(double lambda) const {
  if (lambda < 0) return 0;
  double s = zero_mass;
  for (const auto& [l, m] : breakpoints) {
    if (l > lambda) break;
    s += m;
  }
  return s;
}

double SpectralDensity::total_mass() const {
  double s = zero_mass;
  for (const auto& bp : breakpoints) s += bp.second;
  return s;
}

double SpectralDensity::log_integral(double above) const {
  double s = 0;
  for (const auto& [l, m] : breakpoints)
    if (l > above) s += m * std::log(l);
  return s;
}

double SpectralDensity::smallest_positive() const {
  return breakpoints.empty() ? 0.0 : breakpoints.front().first;
}

double SpectralDensity::largest() const {
  return breakpoints.empty() ? 0.0 : breakpoints.back().first;
}

SpectralDensity make_density(const std::vector<std::pair<double, double>>& values,
                             double zero_tol) {
  SpectralDensity d;
  for (const auto& [l, m] : values) {
    if (l <= zero_tol)
      d.zero_mass += m;
    else
      d.breakpoints.emplace_back(l, m);
  }
  std::stable_sort(d.breakpoints.begin(), d.breakpoints.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  return d;
}

SpectralDensity spectral_density(const Morphism& m, double tol) {
  check_shape(m);
  if (!is_self_adjoint(m, 1e-8)) throw NotSelfAdjoint("spectral density needs a self-adjoint morphism");
  const Backend& b = *m.backend();
  std::vector<std::pair<double, double>> vals;
  for (int j = 0; j < m.fiber_count(); ++j) {
    const Mat s = standard_fiber(m, j);
    if (s.rows() == 0) continue;
    Eigen::SelfAdjointEigenSolver<Mat> es(s, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd ev = es.eigenvalues();
    const double top = ev.cwiseAbs().maxCoeff();
    if (ev.minCoeff() < -std::max(tol * top, 1e-300))
      throw NotSelfAdjoint("spectral density needs a nonnegative morphism");
    for (int k = 0; k < ev.size(); ++k) {
      double l = ev(k) <= tol * top ? 0.0 : ev(k);
      vals.emplace_back(l, b.fiber_weight(j));
    }
  }
  return make_density(vals, 0.0);
}

SpectralDensity singular_density(const Morphism& a, double tol) {
  check_shape(a);
  const Backend& b = *a.backend();
  std::vector<std::pair<double, double>> vals;
  for (int j = 0; j < a.fiber_count(); ++j) {
    const Mat s = standard_fiber(a, j);
    const int n = static_cast<int>(s.cols());
    if (n == 0) continue;
    Eigen::VectorXd sv = Eigen::VectorXd::Zero(n);
    if (s.rows() > 0) {
      Eigen::BDCSVD<Mat> svd(s);
      sv.head(svd.singularValues().size()) = svd.singularValues();
    }
    const int r = fiber_rank(sv, tol);
    for (int k = 0; k < n; ++k) vals.emplace_back(k < r ? sv(k) : 0.0, b.fiber_weight(j));
  }
  return make_density(vals, 0.0);
}

namespace {

bool non_increasing(const std::vector<double>& v, int first, int last) {
  for (int k = first + 1; k <= last; ++k) {
    double slackness = 1e-12 * std::max(1.0, std::abs(v[k - 1]));
    if (v[k] > v[k - 1] + slackness) return false;
  }
  return true;
}

}  // namespace

DetClassVerdict classify_density(const SpectralDensity& d, bool finite_spectrum,
                                 const LadderConfig& cfg) {
  DetClassVerdict v;
  const double phi0 = d.zero_mass;
  std::vector<double> I;
  for (int m = 1; m <= cfg.rungs; ++m) {
    const double eps = std::pow(10.0, -m);
    const double val = d.log_integral(eps);
    v.ladder.emplace_back(eps, val);
    v.tail_bound.push_back(std::log(1.0 / eps) * (d(eps) - phi0));
    I.push_back(val);
  }
  const double total = d.log_integral(0);
  v.ns_exponent = ns_exponent(d);

  if (finite_spectrum) {
    v.status = VerdictStatus::Convergent;
    v.log_integral = total;
    v.diagnostic = "finite spectrum bounded away from zero";
    return v;
  }

  const int last = cfg.rungs - 1;
  const int first = std::max(0, cfg.rungs - cfg.window);
  const double variation = std::abs(I[last] - I[first]);
  const double tail = v.tail_bound[last];

  if (tail <= cfg.converge_tol && variation <= cfg.converge_tol) {
    v.status = VerdictStatus::Convergent;
    v.log_integral = total;
    v.diagnostic = "ladder stabilized";
    return v;
  }

  bool tail_certificate = non_increasing(I, first, last);
  for (int k = first; k <= last && tail_certificate; ++k)
    if (v.tail_bound[k] < cfg.slack) tail_certificate = false;
  if (tail_certificate && v.tail_bound[last] < 0.5 * v.tail_bound[first]) tail_certificate = false;

  bool drop_certificate = (I[first] - I[last]) > cfg.slack && non_increasing(I, first, last);
  for (int k = first + 2; k <= last && drop_certificate; ++k) {
    const double prev = I[k - 2] - I[k - 1], cur = I[k - 1] - I[k];
    if (cur < prev * (1 - 1e-9)) drop_certificate = false;
  }

  if (tail_certificate || drop_certificate) {
    v.status = VerdictStatus::Divergent;
    v.log_integral = -std::numeric_limits<double>::infinity();
    v.diagnostic = tail_certificate ? "tail lower bound stays above slack on the last rungs"
                                    : "ladder decreases without deceleration";
    return v;
  }

  v.status = VerdictStatus::Inconclusive;
  v.log_integral = total;
  v.diagnostic = "ladder neither stabilized nor certified divergence (tail bound " +
                 std::to_string(tail) + ", variation " + std::to_string(variation) + ")";
  return v;
}

double log_fk_det(const Morphism& a, double tol) {
  check_shape(a);
  const Backend& b = *a.backend();
  double s = 0;
  for (int j = 0; j < a.fiber_count(); ++j) {
    const Mat f = standard_fiber(a, j);
    if (f.rows() != f.cols()) throw NotInvertible("fiber " + std::to_string(j) + " is not square");
    if (f.rows() == 0) continue;
    Eigen::BDCSVD<Mat> svd(f);
    const Eigen::VectorXd sv = svd.singularValues();
    if (fiber_rank(sv, tol) < sv.size() || !(sv(0) > 0))
      throw NotInvertible("morphism is singular in fiber " + std::to_string(j));
    double t = 0;
    for (int k = 0; k < sv.size(); ++k) t += std::log(sv(k));
    s += b.fiber_weight(j) * t;
  }
  return s;
}

double log_det_positive(const Morphism& a, double tol) {
  SpectralDensity d = spectral_density(a, tol);
  if (d.zero_mass > 0) throw NotInvertible("positive operator has a kernel");
  return d.log_integral(0);
}

double log_det_restricted(const Morphism& a, double tol) {
  return singular_density(a, tol).log_integral(0);
}

namespace {

void check_injective_dense(const Morphism& alpha, double tol, bool& injective, bool& dense) {
  KernelImage ki = kernel_and_image_closure(alpha, tol);
  injective = ki.kernel.is_zero();
  dense = true;
  for (int j = 0; j < alpha.fiber_count(); ++j)
    if (ki.image.dims[j] != alpha.target.dims[j]) dense = false;
}

}  // namespace

ExtendedDet fk_det_extended(const Morphism& alpha, double tol, const LadderConfig& cfg) {
  bool injective = false, dense = false;
  check_injective_dense(alpha, tol, injective, dense);
  if (!injective) throw NotInjective("extended determinant needs an injective morphism");
  SpectralDensity d = singular_density(alpha, tol);
  ExtendedDet out;
  out.verdict = classify_density(d, alpha.backend()->kind() != BackendKind::Family, cfg);
  if (!dense) out.verdict.diagnostic += "; image is not dense";
  out.log_det = out.verdict.log_integral;
  return out;
}

DetClassVerdict tau_isomorphism_test(const Morphism& alpha, double tol, const LadderConfig& cfg) {
  bool injective = false, dense = false;
  check_injective_dense(alpha, tol, injective, dense);
  if (!injective || !dense) {
    DetClassVerdict v;
    v.status = VerdictStatus::Divergent;
    v.log_integral = -std::numeric_limits<double>::infinity();
    v.diagnostic = !injective ? "not injective" : "image is not dense";
    return v;
  }
  return classify_density(singular_density(alpha, tol),
                          alpha.backend()->kind() != BackendKind::Family, cfg);
}

std::optional<double> ns_exponent(const SpectralDensity& d, int decades, int min_points) {
  if (d.breakpoints.empty()) return std::nullopt;
  const double lo = d.smallest_positive(), hi = d.largest();
  if (lo > 1e-2 * hi) return std::nullopt;

  // Merge numerically equal eigenvalues, then place each step at mid-rise.
  std::vector<std::pair<double, double>> merged;
  for (const auto& [l, m] : d.breakpoints) {
    if (!merged.empty() && std::abs(l - merged.back().first) <= 1e-9 * l)
      merged.back().second += m;
    else
      merged.emplace_back(l, m);
  }
  const double limit = lo * std::pow(10.0, decades);
  std::vector<double> xs, ys;
  double cum = 0;
  for (const auto& [l, m] : merged) {
    if (l > limit) break;
    xs.push_back(std::log(l));
    ys.push_back(std::log(cum + 0.5 * m));
    cum += m;
  }
  if (static_cast<int>(xs.size()) < min_points) return std::nullopt;
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t k = 0; k < xs.size(); ++k) {
    sx += xs[k];
    sy += ys[k];
    sxx += xs[k] * xs[k];
    sxy += xs[k] * ys[k];
  }
  const double den = n * sxx - sx * sx;
  if (!(den > 0)) return std::nullopt;
  const double slope = (n * sxy - sx * sy) / den;
  if (!(slope > 0)) return std::nullopt;
  return slope;
}

}  // namespace l2t
