#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "philap/solve.hpp"

namespace philap {

/// Potential F(n, v) with gradient, normalized so F(n, 0) = 0. `periods`
/// is set when every coordinate is periodic (enables the mean-folding
/// reduction before minimization).
struct PotentialField {
  int dim = 0;
  int horizon = 0;
  std::function<double(int n, const VectorXd& v)> value;
  std::function<VectorXd(int n, const VectorXd& v)> gradient;
  std::optional<VectorXd> periods;

  /// F(n,v) = b(n) |v|^{alpha+1}/(alpha+1) + c(n) sum_i nu_i (1 - cos v_i).
  /// The cosine part is shifted by a constant so F(n,0) = 0; the gradient
  /// b(n)|v|^{alpha-1} v + c(n) SIN_nu(v) is unchanged. Periods 2*pi are
  /// recorded when b vanishes identically.
  static PotentialField power_sin(const VectorXd& b, const VectorXd& c, double alpha,
                                  const VectorXd& nu);

  /// F(n,v) = c(n) sum_i nu_i (1 - cos(2 pi v_i / omega_i)), omega_i-periodic
  /// in each coordinate.
  static PotentialField periodic_multi(const VectorXd& c, const VectorXd& nu,
                                       const VectorXd& omega);

  static PotentialField zero(int dim, int horizon);
  static PotentialField custom(int dim, int horizon,
                               std::function<double(int, const VectorXd&)> value,
                               std::function<VectorXd(int, const VectorXd&)> gradient,
                               std::optional<VectorXd> periods = std::nullopt);
};

struct ReducedSample {
  int axis = 0;
  double t = 0.0;
  double value = 0.0;
};

struct EnergyReport {
  enum class Kind { minimizer, saddle_candidate };

  GridFunction point;
  double energy = 0.0;
  Kind kind = Kind::minimizer;
  double interior_residual = 0.0;
  double boundary_residual = 0.0;
  double feasibility_margin = 0.0;
  bool strip_ok = false;
  int iterations = 0;
  bool converged = false;
  std::vector<ReducedSample> reduced_curve;
  std::optional<VectorXd> descent_witness;  // constant direction with decrease
  double witness_drop = 0.0;                // energy(point) - energy(shifted)
};

/// The energy of the forced potential problem: sum Phi(Delta u) + G(pair)
/// - sum F(n, u(n)) - sum <h(n)|u(n)>; +inf outside the closed Delta ball
/// or when the pair leaves K (tolerance 1e-12).
double energy_value(const PhiMap& phi, const BoundaryLaw& law, const PotentialField& F,
                    const InteriorFunction& h, const GridFunction& u);

/// Multi-start proximal-gradient descent on the energy. When F is periodic
/// per coordinate and the law is diagonal-shift invariant, means are folded
/// into the period cell first. The returned point is certified by the
/// equation/boundary residuals; non-convergence returns best-so-far with
/// `converged` false.
EnergyReport minimize_energy(const PhiMap& phi, const BoundaryLaw& law,
                             const PotentialField& F, const InteriorFunction& h,
                             const SolveOptions& opts = {});

struct Lambda1Result {
  double value = 0.0;
  GridFunction minimizer;
};

/// Smallest Rayleigh-quotient value sum |Delta w|^2 / |w|_T^2 over grid
/// functions whose boundary pair is compatible with the law domain (the
/// quotient is scale invariant, so the Delta bound never binds). Projected
/// gradient with multi-start; tiny negatives clamp to zero.
Lambda1Result lambda1_estimate(double radius, const BoundaryLaw& law, int T, int N,
                               const SolveOptions& opts = {});

/// Saddle-point search along the mean/oscillation split: inner minimization
/// over zero-mean variations, outer maximization of the reduced function
/// m(xbar), then a fixed-point polish through the regularized solver.
/// Requires j to vanish on the diagonal and be bounded on its domain.
EnergyReport saddle_search(const PhiMap& phi, const BoundaryLaw& law,
                           const PotentialField& F, const InteriorFunction& h,
                           const SolveOptions& opts = {});

}  // namespace philap
