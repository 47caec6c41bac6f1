#include "l2t/torsion.hpp"

#include "detail.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

namespace l2t {

namespace {

using detail::complement_basis;
using detail::declared_frame;
using detail::pseudo_solve;
using detail::split_fiber;

int parity(int degree) { return (degree % 2 == 0) ? 1 : -1; }

std::string harm_label(const std::string& l) { return "harm(" + l + ")"; }
std::string clim_label(const std::string& l) { return "clim(" + l + ")"; }
std::string coim_label(const std::string& l) { return "coim(" + l + ")"; }

// Orthonormal pieces of one fiber of one degree, in standard coordinates.
struct FiberBases {
  Mat harm, image, coim;
  Eigen::VectorXd image_sv, coim_sv;
};

// bases[k][j]: degree first_degree + k, fiber j.
using Bases = std::vector<std::vector<FiberBases>>;

Bases decompose(const ChainComplex& input, double tol) {
  const ChainComplex c = drop_negligible(input, tol);
  const int nf = c.backend()->fiber_count();
  Bases b(c.size(), std::vector<FiberBases>(nf));
  for (int k = 0; k < c.size(); ++k)
    for (int j = 0; j < nf; ++j) {
      const int n = c.objects[k].dims[j];
      b[k][j].image = b[k][j].coim = Mat::Zero(n, 0);
      b[k][j].image_sv = b[k][j].coim_sv = Eigen::VectorXd::Zero(0);
    }
  for (int k = 0; k + 1 < c.size(); ++k)
    for (int j = 0; j < nf; ++j) {
      auto s = split_fiber(standard_fiber(c.differentials[k], j), tol);
      b[k][j].coim = s.coim;
      b[k][j].coim_sv = s.sv;
      b[k + 1][j].image = s.image;
      b[k + 1][j].image_sv = s.sv;
    }
  for (int k = 0; k < c.size(); ++k)
    for (int j = 0; j < nf; ++j) {
      FiberBases& f = b[k][j];
      Mat q(f.image.rows(), f.image.cols() + f.coim.cols());
      q << f.image, f.coim;
      f.harm = complement_basis(q, c.objects[k].dims[j]);
    }
  return b;
}

double weighted_cols(const Backend& be, const std::vector<Mat>& qs) {
  double d = 0;
  for (size_t j = 0; j < qs.size(); ++j) d += be.fiber_weight(static_cast<int>(j)) * qs[j].cols();
  return d;
}

std::vector<int> col_counts(const std::vector<Mat>& qs) {
  std::vector<int> out;
  for (const auto& q : qs) out.push_back(static_cast<int>(q.cols()));
  return out;
}

Mat hcat(const std::vector<Mat>& parts, int rows) {
  int cols = 0;
  for (const auto& p : parts) cols += static_cast<int>(p.cols());
  Mat out(rows, cols);
  int at = 0;
  for (const auto& p : parts) {
    out.middleCols(at, p.cols()) = p;
    at += static_cast<int>(p.cols());
  }
  return out;
}

// Morphism x -> object with standard product spanned by q (orthonormal in
// x's product, given in standard coordinates): the orthogonal projection.
Morphism projection_onto(const HObject& x, const HObject& sub, const std::vector<Mat>& q) {
  std::vector<Mat> fibers;
  for (int j = 0; j < x.fibers(); ++j) {
    Mat f = q[j].adjoint();
    if (!x.standard()) f = f * sqrt_product(x.product[j]);
    fibers.push_back(std::move(f));
  }
  return Morphism{x, sub, std::move(fibers)};
}

Morphism inclusion_of(const HObject& sub, const HObject& x, const std::vector<Mat>& q) {
  std::vector<Mat> fibers;
  for (int j = 0; j < x.fibers(); ++j) fibers.push_back(declared_frame(x, j, q[j]));
  return Morphism{sub, x, std::move(fibers)};
}

// Sub-complex spanned by harmonic columns (optional) and the SVD pairs with
// keep[k][j][m] set, where pair m of degree k maps coim column m of C^k to
// image column m of C^{k+1}. Differentials are diagonal in these bases.
struct Piece {
  std::vector<std::vector<Mat>> q;               // q[k][j]
  std::vector<std::vector<std::vector<int>>> img;  // kept image pairs of d_{k-1}
  std::vector<std::vector<std::vector<int>>> coim; // kept coim pairs of d_k
};

Piece select(const ChainComplex& c, const Bases& b, bool with_harm,
             const std::function<bool(double)>& keep_log_sv) {
  const int nf = c.backend()->fiber_count();
  Piece p;
  p.q.assign(c.size(), {});
  p.img.assign(c.size(), std::vector<std::vector<int>>(nf));
  p.coim.assign(c.size(), std::vector<std::vector<int>>(nf));
  for (int k = 0; k < c.size(); ++k)
    for (int j = 0; j < nf; ++j) {
      const FiberBases& f = b[k][j];
      std::vector<Mat> cols;
      if (with_harm) cols.push_back(f.harm);
      for (int m = 0; m < f.image.cols(); ++m)
        if (keep_log_sv(std::log(f.image_sv(m)))) {
          p.img[k][j].push_back(m);
          cols.push_back(f.image.col(m));
        }
      for (int m = 0; m < f.coim.cols(); ++m)
        if (keep_log_sv(std::log(f.coim_sv(m)))) {
          p.coim[k][j].push_back(m);
          cols.push_back(f.coim.col(m));
        }
      p.q[k].push_back(hcat(cols, c.objects[k].dims[j]));
    }
  return p;
}

ChainComplex subcomplex(const ChainComplex& c, const Bases& b, const Piece& p, const std::string& suffix) {
  const auto& be = c.backend();
  std::vector<HObject> objs;
  for (int k = 0; k < c.size(); ++k) objs.push_back(HObject::fibered(be, col_counts(p.q[k])));
  std::vector<Morphism> ds;
  for (int k = 0; k + 1 < c.size(); ++k) {
    std::vector<Mat> f;
    for (int j = 0; j < be->fiber_count(); ++j) {
      Mat m = Mat::Zero(p.q[k + 1][j].cols(), p.q[k][j].cols());
      const auto& src = p.coim[k][j];
      const auto& dst = p.img[k + 1][j];
      const int src_off = static_cast<int>(p.q[k][j].cols() - src.size());
      const int dst_off = static_cast<int>(p.q[k + 1][j].cols() - p.coim[k + 1][j].size() - dst.size());
      for (size_t t = 0; t < src.size(); ++t) m(dst_off + t, src_off + t) = b[k][j].coim_sv(src[t]);
      f.push_back(std::move(m));
    }
    ds.push_back(Morphism{objs[k], objs[k + 1], std::move(f)});
  }
  ChainComplex s = make_complex(std::move(objs), std::move(ds), c.first_degree);
  for (int k = 0; k < s.size(); ++k) s.labels[k] = c.label(c.first_degree + k) + suffix;
  return s;
}

DetLineElement drop_labels(DetLineElement x, const std::map<std::string, double>& dims) {
  x.frame.erase(std::remove_if(x.frame.begin(), x.frame.end(),
                               [&](const FrameFactor& f) {
                                 auto it = dims.find(f.label);
                                 return it != dims.end() && it->second == 0;
                               }),
                x.frame.end());
  return normalize(std::move(x));
}

void check_volume(const ChainComplex& c, const DetLineElement& sigma) {
  if (!same_frame(sigma, standard_volume(c)))
    throw ValidationError("volume element is not on det C: " + describe(sigma) + " expected " +
                          describe(standard_volume(c)));
}

bool agree(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

struct SplitResult {
  DetLineElement rho_small;
  double log_rho_large = 0;
  double combined = 0;
  double formula_discrepancy = 0;
  bool formula_ok = true;
};

SplitResult split_at(const ChainComplex& c, const Bases& b, double log_eps, const DetLineElement& sigma,
                     const TorsionOptions& opt) {
  const double cut = 0.5 * log_eps;  // sigma^2 <= eps  <=>  ln sigma <= cut
  const Piece ps = select(c, b, true, [&](double l) { return l <= cut; });
  const Piece pl = select(c, b, false, [&](double l) { return l > cut; });
  const auto& qs = ps.q;
  const auto& ql = pl.q;
  ChainComplex cs = subcomplex(c, b, ps, "[0,eps]");
  ChainComplex cl = subcomplex(c, b, pl, "(eps,inf)");

  std::map<std::string, double> dims;
  DetLineElement x = sigma;
  for (int k = 0; k < c.size(); ++k) {
    const std::string l = c.label(c.first_degree + k);
    dims[cs.labels[k]] = cs.objects[k].dim_tau();
    dims[cl.labels[k]] = cl.objects[k].dim_tau();
    if (c.objects[k].dim_tau() == 0) continue;
    Morphism in = inclusion_of(cs.objects[k], c.objects[k], qs[k]);
    Morphism out = projection_onto(c.objects[k], cl.objects[k], ql[k]);
    x = exact_sequence_iso(in, out, x, l, cs.labels[k], cl.labels[k], opt.rank_tol);
  }
  x = drop_labels(std::move(x), dims);

  DetLineElement sigma_small;
  sigma_small.log_coeff = x.log_coeff;
  for (const auto& f : x.frame)
    if (f.label.size() >= 7 && f.label.compare(f.label.size() - 7, 7, "[0,eps]") == 0)
      sigma_small.frame.push_back(f);

  SplitResult r;
  r.rho_small = nu_map(cs, sigma_small, opt.rank_tol);
  if (cl.size() > 1 && std::any_of(cl.objects.begin(), cl.objects.end(),
                                   [](const HObject& o) { return !o.is_zero(); })) {
    r.log_rho_large = log_torsion_acyclic(cl, 0.0);
    const double sig = log_torsion_rho_sig(cl, opt.rank_tol);
    r.formula_discrepancy = std::abs(r.log_rho_large - sig);
    r.formula_ok = agree(r.log_rho_large, sig, opt.agree_tol);
    r.combined = r.rho_small.log_coeff + r.log_rho_large - sig;
  } else {
    r.combined = r.rho_small.log_coeff;
  }
  return r;
}

}  // namespace

std::vector<Morphism> harmonic_frames(const ChainComplex& c, double tol) {
  const Bases b = decompose(c, tol);
  std::vector<Morphism> out;
  for (int k = 0; k < c.size(); ++k) {
    std::vector<Mat> q;
    for (const auto& f : b[k]) q.push_back(f.harm);
    out.push_back(inclusion_of(HObject::fibered(c.backend(), col_counts(q)), c.objects[k], q));
  }
  return out;
}

std::optional<double> TorsionReport::scalar_value() const {
  if (!log_scalar) return std::nullopt;
  return std::exp(*log_scalar);
}

bool TorsionReport::determinant_class() const {
  return std::all_of(detclass.begin(), detclass.end(),
                     [](const DetClassVerdict& v) { return v.convergent(); });
}

DetLineElement standard_volume(const ChainComplex& c, double log_coeff) {
  DetLineElement x;
  x.log_coeff = log_coeff;
  for (int i = c.first_degree; i <= c.last_degree(); ++i)
    if (c.at(i).dim_tau() > 0) x.frame.push_back({c.label(i), parity(i)});
  return normalize(std::move(x));
}

DetLineElement nu_map(const ChainComplex& input, const DetLineElement& sigma, double tol) {
  validate(input);
  const ChainComplex c = drop_negligible(input, tol);
  check_volume(c, sigma);
  const auto& be = c.backend();
  const int nf = be->fiber_count();
  const Bases b = decompose(c, tol);
  std::map<std::string, double> dims;
  DetLineElement x = sigma;
  for (int k = 0; k < c.size(); ++k) {
    const HObject& obj = c.objects[k];
    if (obj.dim_tau() == 0) continue;
    const std::string l = c.label(c.first_degree + k), z = "Z(" + l + ")";
    std::vector<Mat> qz, qc, qi, qh;
    for (int j = 0; j < nf; ++j) {
      const FiberBases& f = b[k][j];
      qz.push_back(hcat({f.image, f.harm}, obj.dims[j]));
      qc.push_back(f.coim);
      qi.push_back(f.image);
      qh.push_back(f.harm);
    }
    const HObject zo = HObject::fibered(be, col_counts(qz));
    const HObject co = HObject::fibered(be, col_counts(qc));
    const HObject io = HObject::fibered(be, col_counts(qi));
    const HObject ho = HObject::fibered(be, col_counts(qh));
    dims[z] = zo.dim_tau();
    dims[coim_label(l)] = co.dim_tau();
    dims[clim_label(l)] = io.dim_tau();
    dims[harm_label(l)] = ho.dim_tau();
    x = exact_sequence_iso(inclusion_of(zo, obj, qz), projection_onto(obj, co, qc), x, l, z,
                           coim_label(l), tol);
    if (zo.dim_tau() == 0) {
      x = drop_labels(std::move(x), dims);
      continue;
    }
    std::vector<Mat> a, p;
    for (int j = 0; j < nf; ++j) {
      const int ni = static_cast<int>(qi[j].cols()), nh = static_cast<int>(qh[j].cols());
      Mat aj = Mat::Zero(ni + nh, ni), pj = Mat::Zero(nh, ni + nh);
      aj.topRows(ni).setIdentity();
      pj.rightCols(nh).setIdentity();
      a.push_back(std::move(aj));
      p.push_back(std::move(pj));
    }
    x = exact_sequence_iso(Morphism{io, zo, a}, Morphism{zo, ho, p}, x, z, clim_label(l),
                           harm_label(l), tol);
    x = drop_labels(std::move(x), dims);
  }
  return drop_labels(std::move(x), dims);
}

double log_torsion_acyclic(const ChainComplex& input, double tol) {
  validate(input);
  const ChainComplex c = drop_negligible(input, tol > 0 ? tol : kDefaultRankTol);
  double out = 0;
  for (int i = c.first_degree; i <= c.last_degree(); ++i) {
    if (c.at(i).is_zero()) continue;
    double ld = 0;
    try {
      ld = log_det_positive(laplacian(c, i), tol);
    } catch (const NotInvertible&) {
      throw NotAcyclic("Laplacian in degree " + std::to_string(i) + " has a kernel");
    }
    out += 0.5 * parity(i) * i * ld;
  }
  return out;
}

double log_torsion_rho_sig(const ChainComplex& input, double tol) {
  const ChainComplex c = drop_negligible(input, tol);
  double out = 0;
  for (int i = c.first_degree + 1; i <= c.last_degree(); ++i)
    out += parity(i) * log_det_restricted(*c.into(i), tol);
  return out;
}

TorsionReport torsion(const ChainComplex& input, const DetLineElement& sigma, const TorsionOptions& opt) {
  validate(input);
  check_volume(input, sigma);
  if (!(opt.rank_tol > 0) || !(opt.agree_tol > 0)) throw ValidationError("tolerances must be positive");
  const ChainComplex c = drop_negligible(input, opt.rank_tol);
  const Bases b = decompose(c, opt.rank_tol);
  const auto& be = c.backend();
  const int nf = be->fiber_count();

  double lo = std::numeric_limits<double>::infinity(), hi = -lo;  // ln sigma range
  for (const auto& deg : b)
    for (const auto& f : deg)
      for (int m = 0; m < f.image_sv.size(); ++m) {
        lo = std::min(lo, std::log(f.image_sv(m)));
        hi = std::max(hi, std::log(f.image_sv(m)));
      }
  const bool has_spectrum = lo <= hi;
  double log_eps = 0, log_eps2 = 0;
  if (opt.epsilon > 0) {
    log_eps = std::log(opt.epsilon);
    if (has_spectrum && log_eps >= 2 * hi)
      throw ValidationError("epsilon " + std::to_string(opt.epsilon) +
                            " is not below the largest Laplacian eigenvalue " +
                            std::to_string(std::exp(2 * hi)));
  } else if (opt.epsilon < 0) {
    throw ValidationError("epsilon must be positive");
  } else if (has_spectrum) {
    log_eps = lo == hi ? 2 * lo - std::log(2.0) : lo + hi;
  }
  if (has_spectrum)
    log_eps2 = 0.5 * (log_eps + 2 * hi);
  else
    log_eps2 = log_eps - std::log(2.0);

  TorsionReport rep;
  rep.epsilon = std::exp(log_eps);
  rep.epsilon_check = std::exp(log_eps2);
  SplitResult r1 = split_at(c, b, log_eps, sigma, opt);
  SplitResult r2 = split_at(c, b, log_eps2, sigma, opt);
  rep.rho_small = r1.rho_small;
  rep.log_rho_large = r1.log_rho_large;
  rep.eps_discrepancy = std::abs(r1.combined - r2.combined);
  rep.eps_independence = agree(r1.combined, r2.combined, opt.agree_tol);
  rep.formula_discrepancy = std::max(r1.formula_discrepancy, r2.formula_discrepancy);
  rep.formula_agreement = r1.formula_ok && r2.formula_ok;

  DetLineElement comb, red;
  comb.log_coeff = r1.combined;
  red.log_coeff = r1.combined;
  bool acyclic = true;
  for (int k = 0; k < c.size(); ++k) {
    const int i = c.first_degree + k;
    const std::string l = c.label(i);
    std::vector<Mat> h, im, co;
    for (int j = 0; j < nf; ++j) {
      h.push_back(b[k][j].harm);
      im.push_back(b[k][j].image);
      co.push_back(b[k][j].coim);
    }
    const double betti = weighted_cols(*be, h);
    rep.betti.push_back(betti);
    if (betti > 0) {
      acyclic = false;
      comb.frame.push_back({harm_label(l), parity(i)});
      red.frame.push_back({harm_label(l), parity(i)});
    }
    if (weighted_cols(*be, im) > 0) comb.frame.push_back({clim_label(l), parity(i)});
    if (weighted_cols(*be, co) > 0) comb.frame.push_back({coim_label(l), parity(i)});
    if (const Morphism* d = c.into(i)) red.log_coeff += parity(i) * log_det_restricted(*d, opt.rank_tol);
  }
  rep.combined = normalize(std::move(comb));

  rep.detclass = determinant_class_test(c, opt.rank_tol, opt.ladder);
  const bool divergent = std::any_of(rep.detclass.begin(), rep.detclass.end(), [](const auto& v) {
    return v.status == VerdictStatus::Divergent;
  });
  if (rep.determinant_class()) {
    rep.reduced = normalize(std::move(red));
    if (acyclic) rep.log_scalar = rep.reduced->log_coeff;
  }
  if (opt.require_scalar && !rep.log_scalar) {
    if (divergent) throw NoCanonicalElement("complex is not of determinant class");
    if (!rep.determinant_class()) throw VerdictInconclusive("determinant class undecided");
    throw NoCanonicalElement("reduced cohomology does not vanish");
  }
  return rep;
}

TorsionReport torsion(const ChainComplex& c, const TorsionOptions& opt) {
  return torsion(c, standard_volume(c), opt);
}

double reduced_log_torsion(const ChainComplex& c, double tol, const LadderConfig& cfg) {
  TorsionOptions opt;
  opt.rank_tol = tol;
  opt.ladder = cfg;
  TorsionReport r = torsion(c, opt);
  if (!r.reduced) {
    for (const auto& v : r.detclass)
      if (v.status == VerdictStatus::Divergent)
        throw NoCanonicalElement("complex is not of determinant class: " + v.diagnostic);
    throw VerdictInconclusive("determinant class undecided");
  }
  return r.reduced->log_coeff;
}

void check_chain_map(const ChainComplex& c, const ChainComplex& d, const ChainMap& f, double tol) {
  if (c.first_degree != d.first_degree || c.size() != d.size() || static_cast<int>(f.size()) != c.size())
    throw NotAChainMap("chain map and complexes cover different degree ranges");
  for (int k = 0; k < c.size(); ++k) {
    check_shape(f[k]);
    if (!f[k].source.same_shape(c.objects[k]) || !f[k].target.same_shape(d.objects[k]))
      throw NotAChainMap("component in degree " + std::to_string(c.first_degree + k) +
                         " has the wrong shape");
  }
  for (int k = 0; k + 1 < c.size(); ++k) {
    const Morphism lhs = compose(f[k + 1], c.differentials[k]);
    const Morphism rhs = compose(d.differentials[k], f[k]);
    const double scale = std::max({1.0, max_abs(lhs), max_abs(rhs)});
    if (!approx_equal(lhs, rhs, tol * scale))
      throw NotAChainMap("f d != d f in degree " + std::to_string(c.first_degree + k + 1));
  }
}

ChainComplex reindex(const ChainComplex& c, int new_first, double sign) {
  std::vector<Morphism> ds;
  for (const auto& d : c.differentials) ds.push_back(scaled(d, sign));
  return make_complex(c.objects, std::move(ds), new_first);
}

ChainComplex pad(const ChainComplex& c, int first, int last) {
  if (first > c.first_degree || last < c.last_degree())
    throw ValidationError("padding range must contain the complex");
  const HObject z = HObject::zero(c.backend());
  std::vector<HObject> objs;
  std::vector<Morphism> ds;
  for (int i = first; i <= last; ++i) {
    const bool inside = i >= c.first_degree && i <= c.last_degree();
    objs.push_back(inside ? c.at(i) : z);
    if (i == first) continue;
    if (inside && i > c.first_degree)
      ds.push_back(*c.into(i));
    else
      ds.push_back(zero_morphism(objs[objs.size() - 2], objs.back()));
  }
  return make_complex(std::move(objs), std::move(ds), first);
}

ChainMap pad_map(const ChainMap& f, int f_first, const ChainComplex& c, const ChainComplex& d) {
  ChainMap out;
  for (int k = 0; k < c.size(); ++k) {
    const int i = c.first_degree + k;
    const int m = i - f_first;
    if (m >= 0 && m < static_cast<int>(f.size()))
      out.push_back(f[m]);
    else
      out.push_back(zero_morphism(c.objects[k], d.objects[k]));
  }
  return out;
}

ChainComplex direct_sum(const ChainComplex& a, const ChainComplex& b) {
  const int first = std::min(a.first_degree, b.first_degree);
  const int last = std::max(a.last_degree(), b.last_degree());
  const ChainComplex pa = pad(a, first, last), pb = pad(b, first, last);
  std::vector<HObject> objs;
  std::vector<Morphism> ds;
  for (int k = 0; k < pa.size(); ++k) objs.push_back(direct_sum(pa.objects[k], pb.objects[k]));
  for (size_t k = 0; k < pa.differentials.size(); ++k)
    ds.push_back(direct_sum(pa.differentials[k], pb.differentials[k]));
  return make_complex(std::move(objs), std::move(ds), first);
}

namespace {

struct Harmonic {
  std::vector<HObject> objects;
  std::vector<std::vector<Mat>> q;  // q[k][j]
};

Harmonic harmonic_part(const ChainComplex& c, double tol) {
  const Bases b = decompose(c, tol);
  Harmonic h;
  for (int k = 0; k < c.size(); ++k) {
    std::vector<Mat> qk;
    for (const auto& f : b[k]) qk.push_back(f.harm);
    h.objects.push_back(HObject::fibered(c.backend(), col_counts(qk)));
    h.q.push_back(std::move(qk));
  }
  return h;
}

}  // namespace

LesCheck les_connecting_iso(const ChainComplex& l, const ChainComplex& m, const ChainComplex& n,
                            const ChainMap& alpha, const ChainMap& beta, double tol, double agree_tol) {
  validate(l);
  validate(m);
  validate(n);
  check_chain_map(l, m, alpha);
  check_chain_map(m, n, beta);
  LesCheck out;
  for (int k = 0; k < m.size(); ++k)
    out.compat += parity(m.first_degree + k) * exact_sequence_log_coeff(alpha[k], beta[k], tol, 1e-7);

  out.log_rho_l = reduced_log_torsion(l, tol);
  out.log_rho_m = reduced_log_torsion(m, tol);
  out.log_rho_n = reduced_log_torsion(n, tol);

  const Harmonic hl = harmonic_part(l, tol), hm = harmonic_part(m, tol), hn = harmonic_part(n, tol);
  auto zero_dim = [](const Harmonic& h) {
    return std::all_of(h.objects.begin(), h.objects.end(), [](const HObject& o) { return o.is_zero(); });
  };
  out.extended = !zero_dim(hl) && !zero_dim(hm) && !zero_dim(hn);

  const auto& be = m.backend();
  const int nf = be->fiber_count();
  std::vector<HObject> objs;
  std::vector<Morphism> ds;
  for (int k = 0; k < m.size(); ++k) {
    objs.push_back(hl.objects[k]);
    objs.push_back(hm.objects[k]);
    objs.push_back(hn.objects[k]);
    std::vector<Mat> fa, fb;
    for (int j = 0; j < nf; ++j) {
      fa.push_back(hm.q[k][j].adjoint() * standard_fiber(alpha[k], j) * hl.q[k][j]);
      fb.push_back(hn.q[k][j].adjoint() * standard_fiber(beta[k], j) * hm.q[k][j]);
    }
    ds.push_back(Morphism{hl.objects[k], hm.objects[k], std::move(fa)});
    ds.push_back(Morphism{hm.objects[k], hn.objects[k], std::move(fb)});
    if (k + 1 == m.size()) break;
    std::vector<Mat> fd;
    for (int j = 0; j < nf; ++j) {
      const Mat lift = pseudo_solve(standard_fiber(beta[k], j), hn.q[k][j]);
      const Mat dm = standard_fiber(m.differentials[k], j) * lift;
      const Mat pre = pseudo_solve(standard_fiber(alpha[k + 1], j), dm);
      fd.push_back(hl.q[k + 1][j].adjoint() * pre);
    }
    ds.push_back(Morphism{hn.objects[k], hl.objects[k + 1], std::move(fd)});
  }
  const ChainComplex les = drop_negligible(make_complex(std::move(objs), std::move(ds), 3 * m.first_degree), tol);
  validate(les, 1e-6);
  const Harmonic hh = harmonic_part(les, tol);
  for (const auto& o : hh.objects)
    if (!o.is_zero()) throw NotExact("long exact cohomology sequence is not exact");
  out.log_les_torsion = log_torsion_rho_sig(les, tol);
  out.log_delta = out.log_les_torsion;

  out.lhs = out.log_rho_m + out.compat;
  out.rhs = out.log_rho_l + out.log_rho_n + out.log_delta;
  out.pass = agree(out.lhs, out.rhs, agree_tol);
  return out;
}

ChainComplex cone(const ChainComplex& c, const ChainComplex& ct, const ChainMap& f) {
  check_chain_map(c, ct, f);
  const int a = c.first_degree, b = c.last_degree();
  const HObject z = HObject::zero(c.backend());
  auto obj_c = [&](int i) { return (i >= a && i <= b) ? c.at(i) : z; };
  auto obj_t = [&](int i) { return (i >= a && i <= b) ? ct.at(i) : z; };
  std::vector<HObject> objs;
  for (int i = a; i <= b + 1; ++i) objs.push_back(direct_sum(obj_c(i), obj_t(i - 1)));
  std::vector<Morphism> ds;
  for (int i = a + 1; i <= b + 1; ++i) {
    const HObject s1 = obj_c(i - 1), s2 = obj_t(i - 2), t1 = obj_c(i), t2 = obj_t(i - 1);
    Morphism d11 = c.into(i) ? scaled(*c.into(i), -1.0) : zero_morphism(s1, t1);
    Morphism d12 = zero_morphism(s2, t1);
    Morphism d21 = (i - 1 >= a && i - 1 <= b) ? f[i - 1 - a] : zero_morphism(s1, t2);
    Morphism d22 = ct.into(i - 1) ? *ct.into(i - 1) : zero_morphism(s2, t2);
    ds.push_back(vstack(hstack(d11, d12), hstack(d21, d22)));
  }
  return make_complex(std::move(objs), std::move(ds), a);
}

ConeCheck cone_torsion_check(const ChainComplex& c, const ChainComplex& ct, const ChainMap& f, double tol,
                             double agree_tol) {
  validate(c);
  validate(ct);
  const ChainComplex mc = cone(c, ct, f);
  const int a = c.first_degree, b = c.last_degree();
  const ChainComplex l = pad(reindex(ct, a + 1, 1.0), a, b + 1);
  const ChainComplex nn = pad(reindex(c, a, -1.0), a, b + 1);
  ChainMap alpha, beta;
  for (int k = 0; k < mc.size(); ++k) {
    const HObject lo = l.objects[k], no = nn.objects[k], mo = mc.objects[k];
    alpha.push_back(vstack(zero_morphism(lo, no), identity(lo)));
    beta.push_back(hstack(identity(no), zero_morphism(lo, no)));
    alpha.back().target = mo;
    beta.back().source = mo;
  }
  ConeCheck out;
  out.les = les_connecting_iso(l, mc, nn, alpha, beta, tol, agree_tol);
  out.log_rho_f = out.les.log_rho_m;
  out.log_rho_c = reduced_log_torsion(c, tol);
  out.log_rho_ct = reduced_log_torsion(ct, tol);
  out.shift_dual_defect = std::abs(out.les.log_rho_l + out.log_rho_ct);
  out.predicted = out.log_rho_c - out.log_rho_ct + out.les.log_delta - out.les.compat;
  out.pass = out.les.pass && agree(out.log_rho_f, out.predicted, agree_tol) &&
             out.shift_dual_defect <= agree_tol * std::max(1.0, std::abs(out.log_rho_ct)) &&
             std::abs(out.les.log_rho_n - out.log_rho_c) <= agree_tol * std::max(1.0, std::abs(out.log_rho_c));
  return out;
}

}  // namespace l2t
