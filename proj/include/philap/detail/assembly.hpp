#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>

#include "philap/phi_map.hpp"

namespace philap::detail {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// phi applied columnwise to a matrix of differences (columns with norm >= a
/// make the caller's value() infinite before this is reached).
inline MatrixXd phi_columns(const PhiMap& phi, const MatrixXd& d) {
  MatrixXd p(d.rows(), d.cols());
  for (int k = 0; k < d.cols(); ++k) p.col(k) = phi.value(d.col(k));
  return p;
}

inline double potential_sum(const PhiMap& phi, const MatrixXd& d) {
  double s = 0.0;
  for (int k = 0; k < d.cols(); ++k) s += phi.potential(d.col(k));
  return s;
}

inline double max_col_norm(const MatrixXd& d) {
  double m = 0.0;
  for (int k = 0; k < d.cols(); ++k) m = std::max(m, d.col(k).norm());
  return m;
}

inline MatrixXd differences(const MatrixXd& u) {
  return u.rightCols(u.cols() - 1) - u.leftCols(u.cols() - 1);
}

/// Gradient of u -> sum_k Phi(Delta u(k)) given p = phi of the differences.
inline MatrixXd barrier_gradient(const MatrixXd& p) {
  const int cols = static_cast<int>(p.cols()) + 1;
  MatrixXd g = MatrixXd::Zero(p.rows(), cols);
  g.col(0) = -p.col(0);
  for (int n = 1; n < cols - 1; ++n) g.col(n) = p.col(n - 1) - p.col(n);
  g.col(cols - 1) = p.col(cols - 2);
  return g;
}

/// Largest t >= 0 with every |Delta(u - t*dir)| < a (the raw-step clip of
/// the line search; the barrier rejects anything the projection breaks).
inline double max_feasible_step(const MatrixXd& u, const MatrixXd& dir, double a) {
  const MatrixXd du = differences(u);
  const MatrixXd dd = differences(dir);
  double t = std::numeric_limits<double>::infinity();
  for (int k = 0; k < du.cols(); ++k) {
    const double nn = dd.col(k).squaredNorm();
    if (nn == 0.0) continue;
    const double b = du.col(k).dot(dd.col(k));
    const double c = du.col(k).squaredNorm() - a * a;
    const double disc = b * b - nn * c;  // c < 0 so disc > 0
    t = std::min(t, (b + std::sqrt(std::max(disc, 0.0))) / nn);
  }
  return t;
}

}  // namespace philap::detail
