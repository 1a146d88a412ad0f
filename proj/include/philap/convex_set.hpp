#pragma once

#include <Eigen/Dense>

#include <memory>
#include <vector>

namespace philap {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Closed convex subsets of R^{2N} (or R^N when used as a product factor)
/// from the boundary-condition catalog. Each kind carries closed-form
/// Euclidean projection and normal-cone projection.
class ConvexSet {
 public:
  enum class Kind {
    point,
    full_space,
    product,
    graph_of_orthogonal,
    linear_subspace,
    strip,
    box,
  };

  static ConvexSet point(VectorXd z0);
  static ConvexSet full_space(int ambient_dim);
  /// Cartesian product of two sets; ambient dimension is the sum.
  static ConvexSet product(ConvexSet left, ConvexSet right);
  /// {(x, U x) : x in R^N}; U must be orthogonal.
  static ConvexSet graph_of_orthogonal(MatrixXd U);
  /// Span of the given columns (orthonormalized internally).
  static ConvexSet linear_subspace(MatrixXd basis);
  /// {(x, y) : |x - y| <= sigma} in R^{2N}; sigma > 0.
  static ConvexSet strip(int half_dim, double sigma);
  /// Coordinate box [lower, upper]; entries may be +-inf.
  static ConvexSet box(VectorXd lower, VectorXd upper);

  Kind kind() const { return kind_; }
  int ambient_dim() const { return ambient_; }

  VectorXd project(const VectorXd& z) const;
  double distance(const VectorXd& z) const { return (z - project(z)).norm(); }
  bool contains(const VectorXd& z, double tol = 1e-12) const {
    return distance(z) <= tol;
  }

  /// Projection of w onto the normal cone N_K(z), for z in K (callers pass
  /// project(z) when unsure). At strip boundary points the cone is the
  /// outward ray; ties |x-y| = sigma resolve toward the boundary cone.
  VectorXd project_normal_cone(const VectorXd& z, const VectorXd& w) const;

  /// Projection onto the conical hull of the set (the feasible directions
  /// reachable by shrinking); used by the Rayleigh-quotient minimizer.
  VectorXd project_cone_hull(const VectorXd& z) const;

  /// True when the set is a point or an affine subspace (point, full space,
  /// graph, linear subspace, products of those).
  bool is_affine_subspace() const;

  /// For affine subspaces: K = {offset + B w}, B with orthonormal columns
  /// (possibly zero columns for a point).
  void affine_parameterization(VectorXd& offset, MatrixXd& basis) const;

 private:
  ConvexSet() = default;

  Kind kind_ = Kind::full_space;
  int ambient_ = 0;
  VectorXd point_;                  // point
  std::shared_ptr<ConvexSet> left_, right_;  // product
  MatrixXd orth_;                   // graph_of_orthogonal: U
  MatrixXd basis_;                  // linear_subspace: orthonormal columns
  double sigma_ = 0.0;              // strip
  VectorXd lower_, upper_;          // box
};

}  // namespace philap
