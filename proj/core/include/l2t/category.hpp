#pragma once

// Finite Hilbertian categories with trace, realized by three backends.
//
// Every backend stores objects and morphisms as a list of dense complex
// fibers with a positive weight per fiber:
//   Matrix       one fiber, weight = scale
//   FiniteGroup  one fiber holding the |G|k x |G|k expansion of a group-ring
//                matrix, weight = scale/|G|
//   Family       one fiber per sample point, weight = scale * w_j
// The trace of an endomorphism is sum_j weight_j * Tr(fiber_j).

#include <complex>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "l2t/errors.hpp"

namespace l2t {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline constexpr double kDefaultRankTol = 1e-10;

enum class BackendKind { Matrix, FiniteGroup, Family };

const char* to_string(BackendKind k);

class Backend {
 public:
  static std::shared_ptr<const Backend> matrix(double scale = 1.0);
  // table[g][h] = g*h, identity at index 0.
  static std::shared_ptr<const Backend> finite_group(std::vector<std::vector<int>> table,
                                                     double scale = 1.0);
  static std::shared_ptr<const Backend> family(std::vector<double> points,
                                               std::vector<double> weights,
                                               double scale = 1.0);
  // Midpoint grid on (0,1] with weights 1/n.
  static std::shared_ptr<const Backend> unit_interval(int n, double scale = 1.0);
  // Midpoint grid of angles theta_j = 2*pi*(j+1/2)/n with weights 1/n
  // (normalized Lebesgue measure; theta = 0 is never sampled).
  static std::shared_ptr<const Backend> circle(int n, double scale = 1.0);
  // Cyclic group Z/n with generator 1.
  static std::vector<std::vector<int>> cyclic_table(int n);

  BackendKind kind() const { return kind_; }
  double scale() const { return scale_; }
  int fiber_count() const;
  double fiber_weight(int j) const;

  int group_order() const { return static_cast<int>(table_.size()); }
  int multiply(int g, int h) const { return table_[g][h]; }
  int inverse(int g) const { return inverse_[g]; }
  const std::vector<std::vector<int>>& group_table() const { return table_; }

  const std::vector<double>& sample_points() const { return points_; }
  const std::vector<double>& sample_weights() const { return weights_; }
  double total_measure() const;

  // Same data with a different global trace multiplier.
  std::shared_ptr<const Backend> rescaled(double scale) const;
  // Family backend restricted to a subset of samples (in the given order).
  std::shared_ptr<const Backend> restricted(const std::vector<int>& samples) const;

  bool same_as(const Backend& other) const;

 private:
  Backend() = default;
  BackendKind kind_ = BackendKind::Matrix;
  double scale_ = 1.0;
  std::vector<std::vector<int>> table_;
  std::vector<int> inverse_;
  std::vector<double> points_;
  std::vector<double> weights_;
};

using BackendPtr = std::shared_ptr<const Backend>;

// An object of the category: per-fiber dimensions plus an admissible scalar
// product <x,y>_P = <Px,y> per fiber (empty = standard product).
struct HObject {
  BackendPtr backend;
  std::vector<int> dims;
  std::vector<Mat> product;

  // Matrix: C^n. FiniteGroup: n copies of l2(G). Family: n-dim fibers.
  static HObject free(const BackendPtr& b, int n);
  static HObject fibered(const BackendPtr& b, std::vector<int> dims);
  static HObject zero(const BackendPtr& b) { return free(b, 0); }

  HObject with_product(std::vector<Mat> p) const;
  bool standard() const { return product.empty(); }
  int fibers() const { return static_cast<int>(dims.size()); }
  int dim(int j) const { return dims[j]; }
  // Product operator of fiber j (identity when standard).
  Mat product_at(int j) const;
  // von Neumann dimension tau(identity).
  double dim_tau() const;
  bool is_zero() const;
  // Same backend and fiber dimensions (products are not compared).
  bool same_shape(const HObject& o) const;
};

struct Morphism {
  HObject source;
  HObject target;
  std::vector<Mat> fibers;  // fibers[j] is target.dims[j] x source.dims[j]

  int fiber_count() const { return static_cast<int>(fibers.size()); }
  const BackendPtr& backend() const { return source.backend; }
};

// Checks fiber shapes against source and target; throws ShapeError.
void check_shape(const Morphism& m);

Morphism identity(const HObject& x);
Morphism zero_morphism(const HObject& source, const HObject& target);
Morphism from_fibers(const HObject& source, const HObject& target, std::vector<Mat> fibers);
// Matrix backend convenience.
Morphism from_matrix(const BackendPtr& b, const Mat& m);

// Group-ring matrices: coeffs[r][c] holds |G| coefficients of entry (r,c).
Morphism from_group_ring(const BackendPtr& b,
                         const std::vector<std::vector<std::vector<cplx>>>& coeffs);
// Reads group-ring coefficients back from a morphism between free objects.
std::vector<std::vector<std::vector<cplx>>> group_ring_coefficients(const Morphism& m);
// Left multiplication block of a single group-ring element.
Mat group_ring_block(const Backend& b, const std::vector<cplx>& a);

cplx trace(const Morphism& m);
Morphism compose(const Morphism& f, const Morphism& g);  // f o g
Morphism adjoint(const Morphism& f);
Morphism add(const Morphism& f, const Morphism& g);
Morphism scaled(const Morphism& f, cplx s);
HObject direct_sum(const HObject& a, const HObject& b);
Morphism direct_sum(const Morphism& f, const Morphism& g);
// Block map [f g] : A (+) B -> T.
Morphism hstack(const Morphism& f, const Morphism& g);
// Block map [f; g] : S -> A (+) B.
Morphism vstack(const Morphism& f, const Morphism& g);

// Restriction of a Family morphism to a subset of samples.
Morphism restrict_samples(const Morphism& m, const std::vector<int>& samples);

// Matrix of a morphism in orthonormal coordinates: P_t^{1/2} f P_s^{-1/2}.
Mat standard_fiber(const Morphism& f, int j);
Morphism to_standard(const Morphism& f);
HObject with_standard_product(const HObject& x);

// Hermitian square roots of a positive definite product.
Mat sqrt_product(const Mat& p);
Mat inv_sqrt_product(const Mat& p);
// Throws ValidationError unless every fiber product is Hermitian positive definite.
void check_product(const HObject& x, double tol = kDefaultRankTol);

double max_abs(const Morphism& m);
bool approx_equal(const Morphism& a, const Morphism& b, double tol);
bool is_self_adjoint(const Morphism& m, double tol);

// Orthonormal frames (for the object's products) of ker f and cl(im f).
// The frames are isometric embeddings kernel -> source and image -> target.
struct KernelImage {
  HObject kernel;
  HObject image;
  Morphism kernel_frame;
  Morphism image_frame;
  // Per-fiber singular values of f in orthonormal coordinates (descending).
  std::vector<Eigen::VectorXd> singular_values;
};

// Singular values below tol * (largest singular value of the fiber) count as zero.
KernelImage kernel_and_image_closure(const Morphism& f, double tol = kDefaultRankTol);

// Per-fiber numerical rank under the same convention.
int fiber_rank(const Eigen::VectorXd& singular_values, double tol);

}  // namespace l2t
