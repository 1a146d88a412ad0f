#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <variant>

#include "philap/convex_set.hpp"
#include "philap/grid.hpp"

namespace philap {

/// Smooth convex C^1 function G on R^{2N}. The structural form is kept so
/// the boundary prox can dispatch to closed-form solves.
struct SmoothBoundaryFn {
  enum class Form { zero, affine, quadratic, generic };

  Form form = Form::zero;
  VectorXd affine_coeff;                                   // G(v) = <c|v>
  MatrixXd quad;                                           // G(v) = v'Av/2
  std::function<double(const VectorXd&)> value_fn;         // generic
  std::function<VectorXd(const VectorXd&)> gradient_fn;

  static SmoothBoundaryFn zero();
  static SmoothBoundaryFn affine(VectorXd c);
  static SmoothBoundaryFn quadratic(MatrixXd A);  // A symmetrized internally
  static SmoothBoundaryFn generic(std::function<double(const VectorXd&)> value,
                                  std::function<VectorXd(const VectorXd&)> gradient);

  double value(const VectorXd& v) const;
  VectorXd gradient(const VectorXd& v) const;
};

struct SubdifferentialLaw {
  SmoothBoundaryFn G;
  ConvexSet K;
};

struct MatrixLaw {
  MatrixXd M;  // 2N x 2N, positive semidefinite quadratic form
};

/// A maximal monotone boundary operator gamma on R^N x R^N, represented
/// either as the subdifferential of j = G + I_K or as a linear matrix law.
class BoundaryLaw {
 public:
  /// Unchecked constructors. The catalog constructors below verify the
  /// origin normalizations; solvers also build internal laws (pinned
  /// Dirichlet data, Neumann flux offsets) that intentionally skip them.
  static BoundaryLaw subdifferential(SmoothBoundaryFn G, ConvexSet K);
  static BoundaryLaw matrix(MatrixXd M);

  bool is_subdifferential() const {
    return std::holds_alternative<SubdifferentialLaw>(rep_);
  }
  const SubdifferentialLaw& subdiff() const {
    return std::get<SubdifferentialLaw>(rep_);
  }
  const MatrixLaw& matrix_law() const { return std::get<MatrixLaw>(rep_); }

  int pair_dim() const { return pair_dim_; }  // 2N
  int half_dim() const { return pair_dim_ / 2; }

 private:
  BoundaryLaw(std::variant<SubdifferentialLaw, MatrixLaw> rep, int pair_dim)
      : rep_(std::move(rep)), pair_dim_(pair_dim) {}

  std::variant<SubdifferentialLaw, MatrixLaw> rep_;
  int pair_dim_ = 0;
};

/// Descriptor for the boundary-condition catalog, mirroring the problem
/// file format.
struct LawDescriptor {
  std::string kind;  // dirichlet, neumann, mixed, periodic, antiperiodic,
                     // rotating, matrix, steklov_pair, steklov_difference
  MatrixXd matrix;   // M (2N x 2N) for matrix laws, U (N x N) for rotating
  double sigma = 0.0;           // steklov_difference strip width
  double power = 2.0;           // steklov_difference g(x) = |x|^p / p
  double power_left = 2.0;      // steklov_pair G1(x) = c |x|^p / p
  double power_right = 2.0;
  double coeff_left = 1.0;
  double coeff_right = 1.0;
};

/// Builds a catalog law and verifies the (H_gamma)/(H_j) normalizations:
/// G(0) = 0, grad G(0) = 0, 0 in K, U orthogonal, quadratic form of M
/// nonnegative. Throws std::invalid_argument on violation.
BoundaryLaw make_law(int half_dim, const LawDescriptor& d);

BoundaryLaw make_dirichlet_law(int half_dim);
BoundaryLaw make_neumann_law(int half_dim);
BoundaryLaw make_mixed_law(int half_dim);
BoundaryLaw make_periodic_law(int half_dim);
BoundaryLaw make_antiperiodic_law(int half_dim);
BoundaryLaw make_rotating_law(const MatrixXd& U);
BoundaryLaw make_matrix_law(const MatrixXd& M);
BoundaryLaw make_steklov_pair_law(int half_dim, double coeff_left, double power_left,
                                  double coeff_right, double power_right);
BoundaryLaw make_steklov_difference_law(int half_dim, double power, double sigma);
BoundaryLaw make_custom_law(SmoothBoundaryFn G, ConvexSet K);

/// Euclidean projection onto a catalog set (free-function spelling used by
/// callers that hold a law).
inline VectorXd project_set(const ConvexSet& K, const VectorXd& z) {
  return K.project(z);
}

/// argmin_v G(v) + I_K(v) + |v - z|^2 / (2t). Closed form when G is zero or
/// affine, reduced linear solve when G is quadratic over an affine K,
/// projected-gradient inner loop otherwise (tolerance 1e-12 on the prox
/// optimality residual).
VectorXd prox_boundary(const BoundaryLaw& law, const VectorXd& z, double t);

/// Merit for the boundary inclusion w in gamma(z). Zero (within roundoff)
/// iff the inclusion holds. Matrix laws: |w - Mz|. Subdifferential laws:
/// dist(z, K) plus the distance of w - grad G(z) to the normal cone at the
/// projection of z.
double law_residual(const BoundaryLaw& law, const BoundaryPair& z, const BoundaryPair& w);
double law_residual(const BoundaryLaw& law, const VectorXd& z, const VectorXd& w);

}  // namespace philap
