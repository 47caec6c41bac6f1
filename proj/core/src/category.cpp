#include "l2t/category.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace l2t {

const char* to_string(BackendKind k) {
  switch (k) {
    case BackendKind::Matrix: return "Matrix";
    case BackendKind::FiniteGroup: return "FiniteGroup";
    case BackendKind::Family: return "Family";
  }
  return "?";
}

namespace {

void check_group_table(const std::vector<std::vector<int>>& t) {
  const int n = static_cast<int>(t.size());
  if (n == 0) throw ValidationError("group table is empty");
  for (const auto& row : t)
    if (static_cast<int>(row.size()) != n) throw ValidationError("group table is not square");
  for (int g = 0; g < n; ++g) {
    std::vector<char> row_seen(n, 0), col_seen(n, 0);
    for (int h = 0; h < n; ++h) {
      int a = t[g][h], b = t[h][g];
      if (a < 0 || a >= n || b < 0 || b >= n)
        throw ValidationError("group table entry out of range");
      row_seen[a] = 1;
      col_seen[b] = 1;
    }
    if (std::count(row_seen.begin(), row_seen.end(), 1) != n ||
        std::count(col_seen.begin(), col_seen.end(), 1) != n)
      throw ValidationError("group table row or column " + std::to_string(g) +
                            " is not a permutation");
    if (t[0][g] != g || t[g][0] != g)
      throw ValidationError("index 0 is not the identity of the group table");
  }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        if (t[t[a][b]][c] != t[a][t[b][c]])
          throw ValidationError("group table is not associative");
}

}  // namespace

std::shared_ptr<const Backend> Backend::matrix(double scale) {
  if (!(scale > 0)) throw ValidationError("backend scale must be positive");
  auto b = std::shared_ptr<Backend>(new Backend());
  b->kind_ = BackendKind::Matrix;
  b->scale_ = scale;
  return b;
}

std::shared_ptr<const Backend> Backend::finite_group(std::vector<std::vector<int>> table,
                                                     double scale) {
  if (!(scale > 0)) throw ValidationError("backend scale must be positive");
  check_group_table(table);
  auto b = std::shared_ptr<Backend>(new Backend());
  b->kind_ = BackendKind::FiniteGroup;
  b->scale_ = scale;
  const int n = static_cast<int>(table.size());
  b->inverse_.assign(n, 0);
  for (int g = 0; g < n; ++g)
    for (int h = 0; h < n; ++h)
      if (table[g][h] == 0) b->inverse_[g] = h;
  b->table_ = std::move(table);
  return b;
}

std::shared_ptr<const Backend> Backend::family(std::vector<double> points,
                                               std::vector<double> weights, double scale) {
  if (!(scale > 0)) throw ValidationError("backend scale must be positive");
  if (points.empty()) throw ValidationError("family backend needs at least one sample");
  if (points.size() != weights.size())
    throw ValidationError("family backend: points and weights differ in length");
  for (double w : weights)
    if (!(w > 0) || !std::isfinite(w))
      throw ValidationError("family backend: weights must be positive and finite");
  auto b = std::shared_ptr<Backend>(new Backend());
  b->kind_ = BackendKind::Family;
  b->scale_ = scale;
  b->points_ = std::move(points);
  b->weights_ = std::move(weights);
  return b;
}

std::shared_ptr<const Backend> Backend::unit_interval(int n, double scale) {
  if (n < 1) throw ValidationError("grid size must be positive");
  std::vector<double> p(n), w(n, 1.0 / n);
  for (int j = 0; j < n; ++j) p[j] = (j + 0.5) / n;
  return family(std::move(p), std::move(w), scale);
}

std::shared_ptr<const Backend> Backend::circle(int n, double scale) {
  if (n < 1) throw ValidationError("grid size must be positive");
  std::vector<double> p(n), w(n, 1.0 / n);
  for (int j = 0; j < n; ++j) p[j] = 2.0 * std::numbers::pi * (j + 0.5) / n;
  return family(std::move(p), std::move(w), scale);
}

std::vector<std::vector<int>> Backend::cyclic_table(int n) {
  std::vector<std::vector<int>> t(n, std::vector<int>(n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) t[a][b] = (a + b) % n;
  return t;
}

int Backend::fiber_count() const {
  return kind_ == BackendKind::Family ? static_cast<int>(points_.size()) : 1;
}

double Backend::fiber_weight(int j) const {
  switch (kind_) {
    case BackendKind::Matrix: return scale_;
    case BackendKind::FiniteGroup: return scale_ / static_cast<double>(table_.size());
    case BackendKind::Family: return scale_ * weights_[j];
  }
  return scale_;
}

double Backend::total_measure() const {
  double s = 0;
  for (double w : weights_) s += w;
  return kind_ == BackendKind::Family ? s : 1.0;
}

std::shared_ptr<const Backend> Backend::rescaled(double scale) const {
  if (!(scale > 0)) throw ValidationError("backend scale must be positive");
  auto b = std::shared_ptr<Backend>(new Backend(*this));
  b->scale_ = scale;
  return b;
}

std::shared_ptr<const Backend> Backend::restricted(const std::vector<int>& samples) const {
  if (kind_ != BackendKind::Family) throw Unsupported("restriction needs a Family backend");
  std::vector<double> p, w;
  for (int s : samples) {
    if (s < 0 || s >= fiber_count()) throw ValidationError("sample index out of range");
    p.push_back(points_[s]);
    w.push_back(weights_[s]);
  }
  return family(std::move(p), std::move(w), scale_);
}

bool Backend::same_as(const Backend& o) const {
  if (this == &o) return true;
  return kind_ == o.kind_ && scale_ == o.scale_ && table_ == o.table_ &&
         points_ == o.points_ && weights_ == o.weights_;
}

// ---------------------------------------------------------------- objects

HObject HObject::free(const BackendPtr& b, int n) {
  if (n < 0) throw ValidationError("negative object rank");
  HObject x;
  x.backend = b;
  int d = n;
  if (b->kind() == BackendKind::FiniteGroup) d = n * b->group_order();
  x.dims.assign(b->fiber_count(), d);
  return x;
}

HObject HObject::fibered(const BackendPtr& b, std::vector<int> dims) {
  if (static_cast<int>(dims.size()) != b->fiber_count())
    throw ShapeError("fiber dimension list does not match the backend");
  HObject x;
  x.backend = b;
  x.dims = std::move(dims);
  return x;
}

HObject HObject::with_product(std::vector<Mat> p) const {
  if (static_cast<int>(p.size()) != fibers()) throw ShapeError("product list length mismatch");
  for (int j = 0; j < fibers(); ++j)
    if (p[j].rows() != dims[j] || p[j].cols() != dims[j])
      throw ShapeError("product operator has the wrong size");
  HObject y = *this;
  y.product = std::move(p);
  check_product(y);
  return y;
}

Mat HObject::product_at(int j) const {
  if (product.empty()) return Mat::Identity(dims[j], dims[j]);
  return product[j];
}

double HObject::dim_tau() const {
  double s = 0;
  for (int j = 0; j < fibers(); ++j) s += backend->fiber_weight(j) * dims[j];
  return s;
}

bool HObject::is_zero() const {
  return std::all_of(dims.begin(), dims.end(), [](int d) { return d == 0; });
}

bool HObject::same_shape(const HObject& o) const {
  return backend && o.backend && backend->same_as(*o.backend) && dims == o.dims;
}

void check_product(const HObject& x, double tol) {
  for (int j = 0; j < static_cast<int>(x.product.size()); ++j) {
    const Mat& p = x.product[j];
    double n = std::max(1.0, p.norm());
    if ((p - p.adjoint()).norm() > 1e-10 * n)
      throw ValidationError("scalar product operator is not self-adjoint");
    if (p.rows() == 0) continue;
    Eigen::SelfAdjointEigenSolver<Mat> es(p);
    if (es.eigenvalues().minCoeff() <= tol * es.eigenvalues().cwiseAbs().maxCoeff())
      throw ValidationError("scalar product operator is not positive definite");
  }
}

// ---------------------------------------------------------------- morphisms

void check_shape(const Morphism& m) {
  if (!m.source.backend || !m.target.backend) throw ShapeError("morphism without backend");
  if (!m.source.backend->same_as(*m.target.backend))
    throw BackendMismatch("source and target live on different backends");
  const int n = m.source.backend->fiber_count();
  if (m.fiber_count() != n || m.source.fibers() != n || m.target.fibers() != n)
    throw ShapeError("fiber count mismatch");
  for (int j = 0; j < n; ++j)
    if (m.fibers[j].rows() != m.target.dims[j] || m.fibers[j].cols() != m.source.dims[j])
      throw ShapeError("fiber " + std::to_string(j) + " has shape " +
                       std::to_string(m.fibers[j].rows()) + "x" +
                       std::to_string(m.fibers[j].cols()) + ", expected " +
                       std::to_string(m.target.dims[j]) + "x" +
                       std::to_string(m.source.dims[j]));
}

Morphism identity(const HObject& x) {
  Morphism m{x, x, {}};
  for (int j = 0; j < x.fibers(); ++j) m.fibers.push_back(Mat::Identity(x.dims[j], x.dims[j]));
  return m;
}

Morphism zero_morphism(const HObject& source, const HObject& target) {
  Morphism m{source, target, {}};
  for (int j = 0; j < source.fibers(); ++j)
    m.fibers.push_back(Mat::Zero(target.dims[j], source.dims[j]));
  check_shape(m);
  return m;
}

Morphism from_fibers(const HObject& source, const HObject& target, std::vector<Mat> fibers) {
  Morphism m{source, target, std::move(fibers)};
  check_shape(m);
  return m;
}

Morphism from_matrix(const BackendPtr& b, const Mat& a) {
  if (b->kind() != BackendKind::Matrix) throw Unsupported("from_matrix needs a Matrix backend");
  return from_fibers(HObject::free(b, static_cast<int>(a.cols())),
                     HObject::free(b, static_cast<int>(a.rows())), {a});
}

Mat group_ring_block(const Backend& b, const std::vector<cplx>& a) {
  const int n = b.group_order();
  if (static_cast<int>(a.size()) != n)
    throw ShapeError("group-ring element needs one coefficient per group element");
  Mat blk(n, n);
  for (int g = 0; g < n; ++g)
    for (int h = 0; h < n; ++h) blk(g, h) = a[b.multiply(g, b.inverse(h))];
  return blk;
}

Morphism from_group_ring(const BackendPtr& b,
                         const std::vector<std::vector<std::vector<cplx>>>& coeffs) {
  if (b->kind() != BackendKind::FiniteGroup)
    throw Unsupported("group-ring data needs a FiniteGroup backend");
  const int rows = static_cast<int>(coeffs.size());
  const int cols = rows ? static_cast<int>(coeffs[0].size()) : 0;
  const int n = b->group_order();
  Mat m(rows * n, cols * n);
  for (int r = 0; r < rows; ++r) {
    if (static_cast<int>(coeffs[r].size()) != cols) throw ShapeError("ragged group-ring matrix");
    for (int c = 0; c < cols; ++c) m.block(r * n, c * n, n, n) = group_ring_block(*b, coeffs[r][c]);
  }
  return from_fibers(HObject::free(b, cols), HObject::free(b, rows), {m});
}

std::vector<std::vector<std::vector<cplx>>> group_ring_coefficients(const Morphism& m) {
  const Backend& b = *m.backend();
  if (b.kind() != BackendKind::FiniteGroup)
    throw Unsupported("group-ring read-back needs a FiniteGroup backend");
  const int n = b.group_order();
  const Mat& f = m.fibers[0];
  if (f.rows() % n || f.cols() % n) throw ShapeError("morphism is not between free objects");
  const int rows = static_cast<int>(f.rows() / n), cols = static_cast<int>(f.cols() / n);
  std::vector<std::vector<std::vector<cplx>>> out(
      rows, std::vector<std::vector<cplx>>(cols, std::vector<cplx>(n)));
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      for (int g = 0; g < n; ++g) out[r][c][g] = f(r * n + g, c * n);
  return out;
}

cplx trace(const Morphism& m) {
  check_shape(m);
  if (!m.source.same_shape(m.target)) throw ShapeError("trace needs an endomorphism");
  cplx s = 0;
  const Backend& b = *m.backend();
  for (int j = 0; j < m.fiber_count(); ++j) s += b.fiber_weight(j) * m.fibers[j].trace();
  return s;
}

Morphism compose(const Morphism& f, const Morphism& g) {
  if (!g.target.same_shape(f.source)) throw ShapeError("compose: target(g) != source(f)");
  Morphism h{g.source, f.target, {}};
  h.fibers.reserve(f.fibers.size());
  for (int j = 0; j < f.fiber_count(); ++j) h.fibers.push_back(f.fibers[j] * g.fibers[j]);
  return h;
}

Morphism adjoint(const Morphism& f) {
  check_shape(f);
  Morphism a{f.target, f.source, {}};
  for (int j = 0; j < f.fiber_count(); ++j) {
    Mat fh = f.fibers[j].adjoint();
    if (!f.target.standard()) fh = fh * f.target.product[j];
    if (!f.source.standard()) {
      Eigen::LDLT<Mat> ldlt(f.source.product[j]);
      fh = ldlt.solve(fh);
    }
    a.fibers.push_back(std::move(fh));
  }
  return a;
}

Morphism add(const Morphism& f, const Morphism& g) {
  if (!f.source.same_shape(g.source) || !f.target.same_shape(g.target))
    throw ShapeError("add: shapes differ");
  Morphism h = f;
  for (int j = 0; j < f.fiber_count(); ++j) h.fibers[j] += g.fibers[j];
  return h;
}

Morphism scaled(const Morphism& f, cplx s) {
  Morphism h = f;
  for (auto& m : h.fibers) m *= s;
  return h;
}

namespace {

Mat block_diag(const Mat& a, const Mat& b) {
  Mat m = Mat::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  m.topLeftCorner(a.rows(), a.cols()) = a;
  m.bottomRightCorner(b.rows(), b.cols()) = b;
  return m;
}

void require_same_backend(const HObject& a, const HObject& b) {
  if (!a.backend || !b.backend || !a.backend->same_as(*b.backend))
    throw BackendMismatch("direct sum of objects on different backends");
}

}  // namespace

HObject direct_sum(const HObject& a, const HObject& b) {
  require_same_backend(a, b);
  HObject s;
  s.backend = a.backend;
  for (int j = 0; j < a.fibers(); ++j) s.dims.push_back(a.dims[j] + b.dims[j]);
  if (!a.standard() || !b.standard())
    for (int j = 0; j < a.fibers(); ++j) s.product.push_back(block_diag(a.product_at(j), b.product_at(j)));
  return s;
}

Morphism direct_sum(const Morphism& f, const Morphism& g) {
  require_same_backend(f.source, g.source);
  Morphism h{direct_sum(f.source, g.source), direct_sum(f.target, g.target), {}};
  for (int j = 0; j < f.fiber_count(); ++j) h.fibers.push_back(block_diag(f.fibers[j], g.fibers[j]));
  return h;
}

Morphism hstack(const Morphism& f, const Morphism& g) {
  if (!f.target.same_shape(g.target)) throw ShapeError("hstack: targets differ");
  Morphism h{direct_sum(f.source, g.source), f.target, {}};
  for (int j = 0; j < f.fiber_count(); ++j) {
    Mat m(f.fibers[j].rows(), f.fibers[j].cols() + g.fibers[j].cols());
    m << f.fibers[j], g.fibers[j];
    h.fibers.push_back(std::move(m));
  }
  return h;
}

Morphism vstack(const Morphism& f, const Morphism& g) {
  if (!f.source.same_shape(g.source)) throw ShapeError("vstack: sources differ");
  Morphism h{f.source, direct_sum(f.target, g.target), {}};
  for (int j = 0; j < f.fiber_count(); ++j) {
    Mat m(f.fibers[j].rows() + g.fibers[j].rows(), f.fibers[j].cols());
    m << f.fibers[j], g.fibers[j];
    h.fibers.push_back(std::move(m));
  }
  return h;
}

Morphism restrict_samples(const Morphism& m, const std::vector<int>& samples) {
  auto b = m.backend()->restricted(samples);
  auto restrict_obj = [&](const HObject& x) {
    HObject y;
    y.backend = b;
    for (int s : samples) y.dims.push_back(x.dims[s]);
    if (!x.standard())
      for (int s : samples) y.product.push_back(x.product[s]);
    return y;
  };
  Morphism r{restrict_obj(m.source), restrict_obj(m.target), {}};
  for (int s : samples) r.fibers.push_back(m.fibers[s]);
  return r;
}

// ---------------------------------------------------------------- coordinates

Mat sqrt_product(const Mat& p) {
  if (p.rows() == 0) return p;
  Eigen::SelfAdjointEigenSolver<Mat> es(p);
  return es.operatorSqrt();
}

Mat inv_sqrt_product(const Mat& p) {
  if (p.rows() == 0) return p;
  Eigen::SelfAdjointEigenSolver<Mat> es(p);
  return es.operatorInverseSqrt();
}

Mat standard_fiber(const Morphism& f, int j) {
  Mat m = f.fibers[j];
  if (!f.target.standard()) m = sqrt_product(f.target.product[j]) * m;
  if (!f.source.standard()) m = m * inv_sqrt_product(f.source.product[j]);
  return m;
}

HObject with_standard_product(const HObject& x) {
  HObject y = x;
  y.product.clear();
  return y;
}

Morphism to_standard(const Morphism& f) {
  Morphism g{with_standard_product(f.source), with_standard_product(f.target), {}};
  for (int j = 0; j < f.fiber_count(); ++j) g.fibers.push_back(standard_fiber(f, j));
  return g;
}

double max_abs(const Morphism& m) {
  double s = 0;
  for (const auto& f : m.fibers)
    if (f.size()) s = std::max(s, f.cwiseAbs().maxCoeff());
  return s;
}

bool approx_equal(const Morphism& a, const Morphism& b, double tol) {
  if (!a.source.same_shape(b.source) || !a.target.same_shape(b.target)) return false;
  for (int j = 0; j < a.fiber_count(); ++j) {
    double scale = std::max({1.0, a.fibers[j].norm(), b.fibers[j].norm()});
    if ((a.fibers[j] - b.fibers[j]).norm() > tol * scale) return false;
  }
  return true;
}

bool is_self_adjoint(const Morphism& m, double tol) {
  if (!m.source.same_shape(m.target)) return false;
  return approx_equal(m, adjoint(m), tol);
}

int fiber_rank(const Eigen::VectorXd& s, double tol) {
  if (s.size() == 0) return 0;
  const double top = s(0);
  if (!(top > 0)) return 0;
  int r = 0;
  for (int k = 0; k < s.size(); ++k)
    if (s(k) > tol * top) ++r;
  return r;
}

KernelImage kernel_and_image_closure(const Morphism& f, double tol) {
  check_shape(f);
  KernelImage out;
  std::vector<int> kdims, idims;
  std::vector<Mat> kfr, ifr;
  for (int j = 0; j < f.fiber_count(); ++j) {
    const Mat fs = standard_fiber(f, j);
    const int m = static_cast<int>(fs.rows()), n = static_cast<int>(fs.cols());
    Eigen::VectorXd sv = Eigen::VectorXd::Zero(0);
    Mat u = Mat::Zero(m, 0), v = Mat::Identity(n, n);
    if (m > 0 && n > 0) {
      Eigen::BDCSVD<Mat> svd(fs, Eigen::ComputeFullU | Eigen::ComputeFullV);
      sv = svd.singularValues();
      u = svd.matrixU();
      v = svd.matrixV();
    }
    const int r = fiber_rank(sv, tol);
    Mat ker = v.rightCols(n - r);
    Mat img = u.leftCols(r);
    if (!f.source.standard()) ker = inv_sqrt_product(f.source.product[j]) * ker;
    if (!f.target.standard()) img = inv_sqrt_product(f.target.product[j]) * img;
    kdims.push_back(n - r);
    idims.push_back(r);
    kfr.push_back(std::move(ker));
    ifr.push_back(std::move(img));
    out.singular_values.push_back(std::move(sv));
  }
  out.kernel = HObject::fibered(f.backend(), kdims);
  out.image = HObject::fibered(f.backend(), idims);
  out.kernel_frame = Morphism{out.kernel, f.source, std::move(kfr)};
  out.image_frame = Morphism{out.image, f.target, std::move(ifr)};
  return out;
}

}  // namespace l2t
