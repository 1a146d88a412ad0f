#pragma once

#include <functional>
#include <vector>

#include "philap/solve.hpp"

namespace philap {

/// Right-hand side f(n, u(0), ..., u(T+1)) of the general system
/// -Delta[phi(Delta u(n-1))] = f. The catalog kinds cover the worked
/// examples; anything else goes through `custom`.
struct NonlinearField {
  int dim = 0;
  int horizon = 0;
  std::function<VectorXd(int n, const GridFunction& u)> evaluator;

  VectorXd operator()(int n, const GridFunction& u) const { return evaluator(n, u); }

  /// f(n,.) = (a_nn - 1 + sum_{j != n} a_nj |u(j)|^2 / (1 + |u(n)|^2)) u(n)
  ///          + h(n) / (1 + |u(n)| + |u(T+1) - u(0)|).
  static NonlinearField coupled_matrix(const MatrixXd& coeffs, const InteriorFunction& h);

  /// f(n,.) = -kappa(n) |u(n)|^{p-2} u(n) + c(n) u(n-1)/(1 + |u(n-1)|) + h(n).
  static NonlinearField dissipative_plus_bounded(const VectorXd& kappa, double p,
                                                 const VectorXd& c,
                                                 const InteriorFunction& h);

  /// f(n,.) = -eps |u(n)|^{p-2} u(n) + Delta u(n)/sqrt(1 + |Delta u(n)|^2) + h(n).
  static NonlinearField delay_difference(double eps, double p, const InteriorFunction& h);

  /// f(n,.) = b(n) |u(n)|^{alpha-1} u(n) + c(n) SIN_nu(u(n)) + h(n).
  static NonlinearField pendulum_power(const VectorXd& b, const VectorXd& c,
                                       double alpha, const VectorXd& nu,
                                       const InteriorFunction& h);

  static NonlinearField custom(int dim, int horizon,
                               std::function<VectorXd(int, const GridFunction&)> f);
};

struct HomotopyOptions {
  std::vector<double> mu_grid{0.1, 0.25, 0.5, 0.75, 1.0};  // ends at 1
  double damping = 0.5;
  int anderson_depth = 5;
};

/// N_f(u)(n) = f(n, u(0), ..., u(T+1)) + u(n).
InteriorFunction apply_nf(const NonlinearField& f, const GridFunction& u);

/// Damped/Anderson fixed-point iteration on S = S_gamma o N_f, warm-started
/// along the mu-homotopy u = mu S(u). Divergence is a reported outcome
/// (`converged` false), never silent.
SolveReport picard_solve(const PhiMap& phi, const BoundaryLaw& law,
                         const NonlinearField& f, const SolveOptions& opts = {},
                         const HomotopyOptions& homotopy = {});

struct Thf1Report {
  bool column_sums_ok = false;
  double worst_violation = 0.0;  // <= 0 means the inequality held everywhere
};

/// Samples the quadratic growth condition <f(n,x)|x^n> <= (c_nn - 1)|x^n|^2
/// + sum_{j != n} c_nj |x^j|^2 + c at random points and checks the column
/// sums of the comparison matrix.
Thf1Report check_thf1(const NonlinearField& f, const MatrixXd& c_matrix,
                      double c_const, int samples, uint64_t seed = 0);

}  // namespace philap
