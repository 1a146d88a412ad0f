#pragma once

#include <Eigen/Dense>

#include <stdexcept>

namespace philap {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// A grid function u : Z[0,T+1] -> R^N, stored as an N x (T+2) matrix with
/// one column per grid point. Column n is u(n). Immutable by convention
/// after construction.
struct GridFunction {
  MatrixXd values;

  GridFunction() = default;
  explicit GridFunction(MatrixXd v) : values(std::move(v)) {
    if (values.cols() < 3)
      throw std::invalid_argument("GridFunction: need at least T+2 = 3 columns");
    if (!values.allFinite())
      throw std::invalid_argument("GridFunction: values must be finite");
  }

  static GridFunction zero(int dim, int horizon) {
    GridFunction u;
    u.values = MatrixXd::Zero(dim, horizon + 2);
    return u;
  }
  static GridFunction constant(const VectorXd& c, int horizon) {
    GridFunction u;
    u.values = c.replicate(1, horizon + 2);
    return u;
  }

  int dim() const { return static_cast<int>(values.rows()); }
  int horizon() const { return static_cast<int>(values.cols()) - 2; }

  /// u(n) for n in 0..T+1.
  Eigen::Ref<const VectorXd> at(int n) const { return values.col(n); }

  double norm_T2() const { return values.norm(); }
};

/// h : Z[1,T] -> R^N as an N x T matrix; column k holds h(k+1).
struct InteriorFunction {
  MatrixXd values;

  InteriorFunction() = default;
  explicit InteriorFunction(MatrixXd v) : values(std::move(v)) {
    if (values.cols() < 1)
      throw std::invalid_argument("InteriorFunction: need at least one column");
    if (!values.allFinite())
      throw std::invalid_argument("InteriorFunction: values must be finite");
  }

  static InteriorFunction zero(int dim, int horizon) {
    InteriorFunction h;
    h.values = MatrixXd::Zero(dim, horizon);
    return h;
  }
  static InteriorFunction constant(const VectorXd& c, int horizon) {
    InteriorFunction h;
    h.values = c.replicate(1, horizon);
    return h;
  }

  int dim() const { return static_cast<int>(values.rows()); }
  int horizon() const { return static_cast<int>(values.cols()); }

  /// h(n) for n in 1..T.
  Eigen::Ref<const VectorXd> at(int n) const { return values.col(n - 1); }

  /// Sup norm max_n |h(n)| with the Euclidean norm per node.
  double inf_norm() const {
    double m = 0.0;
    for (int k = 0; k < values.cols(); ++k) m = std::max(m, values.col(k).norm());
    return m;
  }
};

/// The pair (u(0), u(T+1)), or generic (x, y) data in R^N x R^N.
struct BoundaryPair {
  VectorXd left;
  VectorXd right;

  BoundaryPair() = default;
  BoundaryPair(VectorXd l, VectorXd r) : left(std::move(l)), right(std::move(r)) {
    if (left.size() != right.size())
      throw std::invalid_argument("BoundaryPair: mismatched dimensions");
  }

  int dim() const { return static_cast<int>(left.size()); }

  VectorXd as_vector() const {
    VectorXd z(2 * left.size());
    z << left, right;
    return z;
  }
  static BoundaryPair from_vector(const VectorXd& z) {
    const int n = static_cast<int>(z.size()) / 2;
    return BoundaryPair(z.head(n), z.tail(n));
  }

  /// Strip membership |left - right| < sigma.
  bool in_strip(double sigma) const { return (left - right).norm() < sigma; }
};

class PhiMap;

/// Column k is Delta u(k) = u(k+1) - u(k), k = 0..T. Size N x (T+1).
MatrixXd forward_differences(const GridFunction& u);

/// max_n |Delta u(n-1)| over n = 1..T+1.
double sup_diff(const GridFunction& u);

struct NormsAndSplit {
  double norm_T;    // over indices 1..T only
  double norm_T2;   // over 0..T+1
  double sup_diff;  // max |Delta u|
  VectorXd mean;    // average over all T+2 points
  GridFunction tilde;
};
NormsAndSplit norms_and_split(const GridFunction& u);

struct BilinearTerms {
  double O;
  double omega;
  double M;
};

/// The three bilinear quantities built from phi(Delta u) - phi(Delta v).
/// Requires sup_diff < radius for both arguments. Always returns M >= 0 up
/// to roundoff (phi is strictly monotone).
BilinearTerms bilinear_terms(const PhiMap& phi, const GridFunction& u,
                             const GridFunction& v);

}  // namespace philap
