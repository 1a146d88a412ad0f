#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>

namespace philap {

using Eigen::VectorXd;

struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Scalar radial profile g : [0, a) -> [0, inf), strictly increasing,
/// g(0) = 0, g(s) -> inf as s -> a-. `antiderivative` (when present) is a
/// primitive of g with value 0 at 0; otherwise the potential is obtained by
/// adaptive quadrature. `derivative` may be null; the inverse then falls
/// back to bisection/secant steps.
struct RadialProfile {
  std::function<double(double)> g;
  std::function<double(double)> derivative;
  std::function<double(double)> antiderivative;
};

/// A singular radial homeomorphism phi : B_a -> R^N with convex potential,
/// phi(y) = g(|y|) y/|y|. Immutable; evaluation is reentrant.
class PhiMap {
 public:
  enum class Kind { relativistic, p_relativistic, double_phase, custom_radial };

  static PhiMap relativistic(double a = 1.0);
  static PhiMap p_relativistic(double p, double a = 1.0);
  static PhiMap double_phase(double p, double q, double a = 1.0);
  static PhiMap custom_radial(double a, RadialProfile profile);

  Kind kind() const { return kind_; }
  double radius() const { return a_; }
  double exponent_p() const { return p_; }
  double exponent_q() const { return q_; }

  /// phi(y); throws std::domain_error unless |y| < a.
  VectorXd value(const VectorXd& y) const;

  /// phi^{-1}(z), defined on all of R^N; the result has |y| < a.
  VectorXd invert(const VectorXd& z) const;

  /// Phi(y) on the closed ball (continuous extension at |y| = a);
  /// throws std::domain_error if |y| > a.
  double potential(const VectorXd& y) const;

  // Radial pieces, exposed for solvers and tests.
  double profile(double s) const;             // g(s), s in [0, a)
  double profile_derivative(double s) const;  // g'(s)
  double profile_inverse(double r) const;     // s with g(s) = r
  double potential_radial(double s) const;    // Phi as a function of |y|

 private:
  PhiMap(Kind kind, double a, double p, double q, RadialProfile profile);

  Kind kind_;
  double a_;
  double p_ = 0.0;
  double q_ = 0.0;
  RadialProfile profile_;  // only set for custom_radial
};

}  // namespace philap
