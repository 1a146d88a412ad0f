#pragma once

#include <functional>
#include <optional>
#include <stdexcept>

#include "philap/boundary_law.hpp"
#include "philap/grid.hpp"
#include "philap/phi_map.hpp"

namespace philap {

struct MaxIterationsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InfeasibleLawError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolveOptions {
  double tol_residual = 1e-10;
  int max_iters = 100000;
  double step_safety = 0.99;     // fraction of the largest domain-keeping step
  double prox_point_lambda = 1.0;
  uint64_t seed = 0;
  std::optional<GridFunction> initial;  // overrides the default start
  std::function<void(const GridFunction&)> iterate_observer;  // test hook
  bool sample_reduced_curve = false;    // energy searches: emit m(xbar) slices
};

struct SolveReport {
  GridFunction solution;
  double interior_residual = 0.0;  // inf-norm of the equation residual, n = 1..T
  double boundary_residual = 0.0;  // law_residual at the boundary data
  double feasibility_margin = 0.0; // a - sup_diff(u)
  bool strip_ok = false;           // (u(0), u(T+1)) in D_{(T+1)a}
  int iterations = 0;
  bool converged = false;
  std::optional<double> energy;
};

/// Unique solution of the regularized problem with gamma = partial j,
/// j = G + I_K, by proximal-gradient minimization of the strictly convex
/// energy E(v) = Psi(v) + J(v) + |v|_T^2/2 - sum <h|v>. Throws
/// MaxIterationsError when the residual targets are not met.
SolveReport solve_q_subdiff(const PhiMap& phi, const BoundaryLaw& law,
                            const InteriorFunction& h,
                            const SolveOptions& opts = {});

/// Dirichlet problem with pinned values u(0) = bc.left, u(T+1) = bc.right.
/// Requires |left - right| < (T+1) a.
SolveReport solve_dirichlet(const PhiMap& phi, const BoundaryPair& bc,
                            const InteriorFunction& h,
                            const SolveOptions& opts = {});

/// Neumann problem with prescribed fluxes phi(Delta u(0)) = flux.left,
/// phi(Delta u(T)) = flux.right.
SolveReport solve_neumann(const PhiMap& phi, const BoundaryPair& flux,
                          const InteriorFunction& h,
                          const SolveOptions& opts = {});

/// theta(x, y) = (-phi(Delta u(0)), phi(Delta u(T))) of the Dirichlet
/// solution at (x, y); defined on the open strip |x - y| < (T+1) a.
BoundaryPair theta_eval(const PhiMap& phi, const InteriorFunction& h,
                        const BoundaryPair& z, const SolveOptions& opts = {});

/// Unique solution for any catalog law: subdifferential laws delegate to
/// solve_q_subdiff; matrix laws run proximal-point on Gamma = gamma + theta
/// with a damped, Anderson-accelerated inner fixed point.
SolveReport solve_q_general(const PhiMap& phi, const BoundaryLaw& law,
                            const InteriorFunction& h,
                            const SolveOptions& opts = {});

}  // namespace philap
