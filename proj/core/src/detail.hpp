#pragma once

// Small dense helpers shared by the implementation files.

#include "l2t/category.hpp"

namespace l2t::detail {

// Thin SVD pieces of one fiber in orthonormal coordinates.
struct FiberSplit {
  Mat coim;            // n x r
  Mat ker;             // n x (n - r)
  Mat image;           // m x r
  Mat coker;           // m x (m - r)
  Eigen::VectorXd sv;  // the r nonzero singular values, descending
};

inline FiberSplit split_fiber(const Mat& a, double tol) {
  const int m = static_cast<int>(a.rows()), n = static_cast<int>(a.cols());
  FiberSplit s;
  if (m == 0 || n == 0) {
    s.coim = Mat::Zero(n, 0);
    s.ker = Mat::Identity(n, n);
    s.image = Mat::Zero(m, 0);
    s.coker = Mat::Identity(m, m);
    s.sv = Eigen::VectorXd::Zero(0);
    return s;
  }
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const int r = fiber_rank(svd.singularValues(), tol);
  s.coim = svd.matrixV().leftCols(r);
  s.ker = svd.matrixV().rightCols(n - r);
  s.image = svd.matrixU().leftCols(r);
  s.coker = svd.matrixU().rightCols(m - r);
  s.sv = svd.singularValues().head(r);
  return s;
}

// Orthonormal basis of the orthogonal complement of the span of q's columns
// (q assumed to have orthonormal columns), inside C^n.
inline Mat complement_basis(const Mat& q, int n) {
  if (q.cols() == 0) return Mat::Identity(n, n);
  if (q.cols() >= n) return Mat::Zero(n, 0);
  Eigen::JacobiSVD<Mat> svd(q, Eigen::ComputeFullU);
  return svd.matrixU().rightCols(n - q.cols());
}

// Frame in the declared product from an orthonormal basis in standard coordinates.
inline Mat declared_frame(const HObject& x, int j, const Mat& q) {
  return x.standard() ? q : Mat(inv_sqrt_product(x.product[j]) * q);
}

inline Mat pseudo_solve(const Mat& a, const Mat& rhs) {
  if (a.rows() == 0 || a.cols() == 0) return Mat::Zero(a.cols(), rhs.cols());
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.solve(rhs);
}

}  // namespace l2t::detail
