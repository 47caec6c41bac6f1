#pragma once

// Random instances for property checks: matrices, morphisms, complexes with
// prescribed shape, chain maps and exact triples.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "l2t/cellular.hpp"
#include "l2t/torsion.hpp"

namespace l2t::gen {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline cplx gaussian(Rng& rng) {
  std::normal_distribution<double> n;
  return {n(rng), n(rng)};
}

inline Mat random_matrix(Rng& rng, int m, int n) {
  Mat a(m, n);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < n; ++c) a(r, c) = gaussian(rng);
  return a;
}

// Well-conditioned invertible matrix.
inline Mat random_invertible_matrix(Rng& rng, int n) {
  Mat a = random_matrix(rng, n, n) * 0.4;
  a += 2.0 * Mat::Identity(n, n);
  return a;
}

inline Mat random_positive_matrix(Rng& rng, int n) {
  Mat b = random_matrix(rng, n, n) * 0.5;
  return b * b.adjoint() + Mat::Identity(n, n);
}

inline BackendPtr random_backend(Rng& rng, BackendKind kind) {
  switch (kind) {
    case BackendKind::Matrix:
      return Backend::matrix(uniform(rng, 0.5, 2.0));
    case BackendKind::FiniteGroup: {
      if (uniform_int(rng, 0, 2) == 0) {
        // symmetric group S3 as permutations of {0,1,2}
        std::vector<std::vector<int>> perms = {{0, 1, 2}, {1, 0, 2}, {0, 2, 1},
                                               {2, 1, 0}, {1, 2, 0}, {2, 0, 1}};
        std::vector<std::vector<int>> table(6, std::vector<int>(6));
        for (int g = 0; g < 6; ++g)
          for (int h = 0; h < 6; ++h) {
            std::vector<int> p(3);
            for (int x = 0; x < 3; ++x) p[x] = perms[g][perms[h][x]];
            for (int k = 0; k < 6; ++k)
              if (perms[k] == p) table[g][h] = k;
          }
        return Backend::finite_group(table, uniform(rng, 0.5, 2.0));
      }
      return Backend::finite_group(Backend::cyclic_table(uniform_int(rng, 2, 4)), uniform(rng, 0.5, 2.0));
    }
    case BackendKind::Family: {
      const int n = uniform_int(rng, 2, 5);
      std::vector<double> pts, w;
      for (int j = 0; j < n; ++j) {
        pts.push_back(uniform(rng, 0.0, 1.0));
        w.push_back(uniform(rng, 0.1, 1.0));
      }
      return Backend::family(pts, w, uniform(rng, 0.5, 2.0));
    }
  }
  return Backend::matrix();
}

// A morphism of the category between free objects of the given ranks.
inline Morphism random_morphism(Rng& rng, const BackendPtr& b, int m, int n, double scale = 1.0) {
  if (b->kind() == BackendKind::FiniteGroup) {
    const int g = b->group_order();
    std::vector<std::vector<std::vector<cplx>>> coeffs(m, std::vector<std::vector<cplx>>(n));
    for (auto& row : coeffs)
      for (auto& e : row)
        for (int k = 0; k < g; ++k) e.push_back(scale * gaussian(rng));
    return from_group_ring(b, coeffs);
  }
  const HObject s = HObject::free(b, n), t = HObject::free(b, m);
  std::vector<Mat> f;
  for (int j = 0; j < b->fiber_count(); ++j) f.push_back(scale * random_matrix(rng, m, n));
  return from_fibers(s, t, std::move(f));
}

inline Morphism random_invertible(Rng& rng, const BackendPtr& b, int n) {
  Morphism a = random_morphism(rng, b, n, n, 0.3 / std::max(1, b->kind() == BackendKind::FiniteGroup
                                                                     ? b->group_order()
                                                                     : 1));
  return add(a, scaled(identity(HObject::free(b, n)), 2.0));
}

inline std::vector<Mat> random_product(Rng& rng, const HObject& x) {
  std::vector<Mat> p;
  if (x.backend->kind() == BackendKind::FiniteGroup) {
    // a product must commute with the group action: P = A* A for a group-ring A
    Morphism a = random_invertible(rng, x.backend, x.dims[0] / x.backend->group_order());
    Morphism pa = compose(adjoint(a), a);
    for (const auto& f : pa.fibers) p.push_back(f);
    return p;
  }
  for (int j = 0; j < x.fibers(); ++j) p.push_back(random_positive_matrix(rng, x.dims[j]));
  return p;
}

inline Morphism inverse_of(const Morphism& f) {
  std::vector<Mat> inv;
  for (const auto& m : f.fibers) inv.push_back(m.rows() ? Mat(m.inverse()) : m);
  return Morphism{f.target, f.source, std::move(inv)};
}

struct ComplexShape {
  std::vector<int> ranks;  // ranks[k] = rank of differentials[k]
  std::vector<int> betti;  // per object (in module copies)
};

// Normal form with chosen ranks and Betti numbers, conjugated by random
// invertible maps. Objects are free of rank ranks_in + ranks_out + betti.
inline ChainComplex random_complex(Rng& rng, const BackendPtr& b, const ComplexShape& sh,
                                   int first_degree = 0, double sv_lo = 0.3, double sv_hi = 3.0) {
  const int len = static_cast<int>(sh.betti.size());
  std::vector<int> n(len);
  for (int k = 0; k < len; ++k) {
    const int in = k > 0 ? sh.ranks[k - 1] : 0;
    const int out = k + 1 < len ? sh.ranks[k] : 0;
    n[k] = in + out + sh.betti[k];
  }
  std::vector<HObject> objs;
  for (int k = 0; k < len; ++k) objs.push_back(HObject::free(b, n[k]));
  std::vector<Morphism> g;
  for (int k = 0; k < len; ++k) g.push_back(random_invertible(rng, b, n[k]));
  std::vector<Morphism> ds;
  for (int k = 0; k + 1 < len; ++k) {
    // C^k = [coim(out) | image(in) | harm]; coim block of C^k -> image block of C^{k+1}
    const int r = sh.ranks[k];
    Morphism d;
    if (r == 0) {
      d = zero_morphism(objs[k], objs[k + 1]);
    } else if (b->kind() == BackendKind::FiniteGroup) {
      const int go = b->group_order();
      std::vector<std::vector<std::vector<cplx>>> coeffs(n[k + 1],
                                                        std::vector<std::vector<cplx>>(n[k], std::vector<cplx>(go, 0.0)));
      const int out_next = k + 2 < len ? sh.ranks[k + 1] : 0;
      for (int m = 0; m < r; ++m) coeffs[out_next + m][m][0] = uniform(rng, sv_lo, sv_hi);
      d = from_group_ring(b, coeffs);
    } else {
      std::vector<Mat> f;
      const int out_next = k + 2 < len ? sh.ranks[k + 1] : 0;
      for (int j = 0; j < b->fiber_count(); ++j) {
        Mat m = Mat::Zero(n[k + 1], n[k]);
        for (int t = 0; t < r; ++t) m(out_next + t, t) = uniform(rng, sv_lo, sv_hi);
        f.push_back(std::move(m));
      }
      d = from_fibers(objs[k], objs[k + 1], std::move(f));
    }
    ds.push_back(compose(g[k + 1], compose(d, inverse_of(g[k]))));
  }
  return make_complex(objs, ds, first_degree);
}

inline ComplexShape random_shape(Rng& rng, int max_len, int max_rank, bool acyclic) {
  ComplexShape sh;
  const int len = uniform_int(rng, 2, max_len);
  for (int k = 0; k + 1 < len; ++k) sh.ranks.push_back(uniform_int(rng, acyclic ? 1 : 0, max_rank));
  for (int k = 0; k < len; ++k) sh.betti.push_back(acyclic ? 0 : uniform_int(rng, 0, 1));
  if (!acyclic && std::all_of(sh.betti.begin(), sh.betti.end(), [](int x) { return x == 0; }))
    sh.betti[uniform_int(rng, 0, len - 1)] = 1;
  return sh;
}

// Replaces the products of all objects by random admissible ones.
inline ChainComplex with_random_products(Rng& rng, ChainComplex c) {
  std::vector<HObject> objs;
  for (const auto& o : c.objects) objs.push_back(o.dims[0] ? o.with_product(random_product(rng, o)) : o);
  return make_complex(objs, c.differentials, c.first_degree);
}

// Orthonormal basis of the null space of a (columns).
inline Mat null_space(const Mat& a) {
  if (a.rows() == 0 || a.cols() == 0) return Mat::Identity(a.cols(), a.cols());
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  int r = 0;
  for (int k = 0; k < s.size(); ++k)
    if (s(k) > 1e-10 * std::max(1.0, s(0))) ++r;
  return svd.matrixV().rightCols(a.cols() - r);
}

// Random solution of the homogeneous linear system on (X_0, ..., X_{L-1}) given
// as a list of constraints sum_t A_t X_{k_t} B_t = 0. Matrix backend only.
struct Unknown {
  int rows, cols;
};
struct Constraint {
  struct Part {
    int unknown;
    Mat left, right;
  };
  std::vector<Part> parts;
};

inline std::vector<Mat> random_solution(Rng& rng, const std::vector<Unknown>& unknowns,
                                        const std::vector<Constraint>& constraints) {
  std::vector<int> offset;
  int total = 0;
  for (const auto& u : unknowns) {
    offset.push_back(total);
    total += u.rows * u.cols;
  }
  int rows = 0;
  for (const auto& c : constraints)
    if (!c.parts.empty()) rows += static_cast<int>(c.parts[0].left.rows() * c.parts[0].right.cols());
  Mat sys = Mat::Zero(rows, total);
  int at = 0;
  for (const auto& c : constraints) {
    if (c.parts.empty()) continue;
    const int m = static_cast<int>(c.parts[0].left.rows()), n = static_cast<int>(c.parts[0].right.cols());
    for (const auto& p : c.parts) {
      const Unknown& u = unknowns[p.unknown];
      // vec(A X B) = (B^T kron A) vec(X), column-major
      for (int xc = 0; xc < u.cols; ++xc)
        for (int xr = 0; xr < u.rows; ++xr) {
          const int col = offset[p.unknown] + xc * u.rows + xr;
          for (int oc = 0; oc < n; ++oc)
            for (int orow = 0; orow < m; ++orow)
              sys(at + oc * m + orow, col) += p.left(orow, xr) * p.right(xc, oc);
        }
    }
    at += m * n;
  }
  const Mat ns = null_space(sys);
  Vec coef = Vec::Zero(ns.cols());
  for (int k = 0; k < coef.size(); ++k) coef(k) = gaussian(rng);
  const Vec x = ns.cols() ? Vec(ns * coef) : Vec::Zero(total);
  std::vector<Mat> out;
  for (size_t u = 0; u < unknowns.size(); ++u) {
    Mat m(unknowns[u].rows, unknowns[u].cols);
    for (int c = 0; c < unknowns[u].cols; ++c)
      for (int r = 0; r < unknowns[u].rows; ++r) m(r, c) = x(offset[u] + c * unknowns[u].rows + r);
    out.push_back(std::move(m));
  }
  return out;
}

inline Mat fiber0(const Morphism& m) { return m.fibers[0]; }

// Random chain map c -> d between Matrix complexes over the same degrees.
inline ChainMap random_chain_map(Rng& rng, const ChainComplex& c, const ChainComplex& d) {
  std::vector<Unknown> u;
  for (int k = 0; k < c.size(); ++k) u.push_back({d.objects[k].dims[0], c.objects[k].dims[0]});
  std::vector<Constraint> cons;
  for (int k = 0; k + 1 < c.size(); ++k) {
    const int m = d.objects[k + 1].dims[0], n = c.objects[k].dims[0];
    // f_{k+1} dc_k - dd_k f_k = 0
    Constraint con;
    con.parts.push_back({k + 1, Mat::Identity(m, m), fiber0(c.differentials[k])});
    con.parts.push_back({k, -fiber0(d.differentials[k]), Mat::Identity(n, n)});
    cons.push_back(std::move(con));
  }
  auto xs = random_solution(rng, u, cons);
  ChainMap f;
  for (int k = 0; k < c.size(); ++k) f.push_back(from_fibers(c.objects[k], d.objects[k], {xs[k]}));
  return f;
}

struct ExactTriple {
  ChainComplex l, m, n;
  ChainMap alpha, beta;
};

// M = L (+) N with D = [[dL, theta], [0, dN]], optionally conjugated by a
// random frame change g on M.
inline ExactTriple random_triple(Rng& rng, const ChainComplex& l, const ChainComplex& n,
                                 bool twist = true, bool frame_change = true) {
  const int len = l.size();
  std::vector<Mat> theta(len);
  theta[0] = Mat::Zero(l.objects[0].dims[0], 0);
  if (twist && len > 1) {
    // theta_k : N^{k-1} -> L^k for k = 1..len-1, with dL_{k+1} theta_k + theta_{k+1} dN_k = 0
    std::vector<Unknown> u;
    for (int k = 1; k < len; ++k) u.push_back({l.objects[k].dims[0], n.objects[k - 1].dims[0]});
    std::vector<Constraint> cons;
    for (int k = 1; k + 1 < len; ++k) {
      const int rows = l.objects[k + 1].dims[0], cols = n.objects[k - 1].dims[0];
      Constraint con;
      con.parts.push_back({k - 1, fiber0(l.differentials[k]), Mat::Identity(cols, cols)});
      con.parts.push_back({k, Mat::Identity(rows, rows), fiber0(n.differentials[k - 1])});
      cons.push_back(std::move(con));
    }
    auto xs = random_solution(rng, u, cons);
    for (int k = 1; k < len; ++k) theta[k] = xs[k - 1];
  } else {
    for (int k = 1; k < len; ++k) theta[k] = Mat::Zero(l.objects[k].dims[0], n.objects[k - 1].dims[0]);
  }
  const auto& b = l.backend();
  std::vector<HObject> objs;
  std::vector<Mat> g, gi;
  for (int k = 0; k < len; ++k) {
    const int s = l.objects[k].dims[0] + n.objects[k].dims[0];
    objs.push_back(HObject::free(b, s));
    Mat gk = frame_change ? random_invertible_matrix(rng, s) : Mat(Mat::Identity(s, s));
    gi.push_back(gk.inverse());
    g.push_back(std::move(gk));
  }
  std::vector<Morphism> ds;
  for (int k = 0; k + 1 < len; ++k) {
    const int lr = l.objects[k + 1].dims[0], lc = l.objects[k].dims[0];
    const int nr = n.objects[k + 1].dims[0], nc = n.objects[k].dims[0];
    Mat d = Mat::Zero(lr + nr, lc + nc);
    d.topLeftCorner(lr, lc) = fiber0(l.differentials[k]);
    d.topRightCorner(lr, nc) = theta[k + 1];
    d.bottomRightCorner(nr, nc) = fiber0(n.differentials[k]);
    ds.push_back(from_fibers(objs[k], objs[k + 1], {g[k + 1] * d * gi[k]}));
  }
  ExactTriple t;
  t.l = l;
  t.n = n;
  t.m = make_complex(objs, ds, l.first_degree);
  for (int k = 0; k < len; ++k) {
    const int lk = l.objects[k].dims[0], nk = n.objects[k].dims[0];
    Mat a = Mat::Zero(lk + nk, lk), p = Mat::Zero(nk, lk + nk);
    a.topRows(lk).setIdentity();
    p.rightCols(nk).setIdentity();
    t.alpha.push_back(from_fibers(l.objects[k], objs[k], {g[k] * a}));
    t.beta.push_back(from_fibers(objs[k], n.objects[k], {p * gi[k]}));
  }
  return t;
}

// Independent evaluation of the acyclic torsion of a Matrix complex from
// random lifts: sum_i (-1)^i log|det[d_i S_i | S_{i+1}]|, S_i : rank d_i
// random columns in C^{i-1}.
inline double milnor_log_torsion(Rng& rng, const ChainComplex& c) {
  const int len = c.size();
  std::vector<int> rank(len + 1, 0);  // rank[k] = rank of d into degree k (index k)
  for (int k = 1; k < len; ++k) {
    Eigen::JacobiSVD<Mat> svd(fiber0(c.differentials[k - 1]));
    const auto& s = svd.singularValues();
    for (int t = 0; t < s.size(); ++t)
      if (s(t) > 1e-10 * s(0)) ++rank[k];
  }
  std::vector<Mat> lift(len + 1);
  for (int k = 1; k < len; ++k) lift[k] = random_matrix(rng, c.objects[k - 1].dims[0], rank[k]);
  double out = 0;
  for (int k = 0; k < len; ++k) {
    const int deg = c.first_degree + k;
    const int n = c.objects[k].dims[0];
    if (n == 0) continue;
    Mat basis(n, 0);
    Mat img = k > 0 ? Mat(fiber0(c.differentials[k - 1]) * lift[k]) : Mat(n, 0);
    Mat nxt = k + 1 < len ? lift[k + 1] : Mat(n, 0);
    basis.resize(n, img.cols() + nxt.cols());
    basis << img, nxt;
    const double ld = std::log(std::abs(basis.determinant()));
    out += (deg % 2 == 0 ? 1 : -1) * ld * c.backend()->scale();
  }
  return out;
}

}  // namespace l2t::gen
