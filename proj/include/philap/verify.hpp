#pragma once

#include <optional>
#include <string>
#include <vector>

#include "philap/energy.hpp"
#include "philap/nonlinear.hpp"
#include "philap/solve.hpp"

namespace philap {

struct EstimateEntry {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = false;  // lhs <= rhs + 1e-10
};

struct ResidualReport {
  double interior_inf_norm = 0.0;
  double boundary_residual = 0.0;
  double feasibility_margin = 0.0;
  bool strip_ok = false;
  std::vector<EstimateEntry> estimates;

  bool certified(double tol) const {
    if (interior_inf_norm > tol || boundary_residual > tol) return false;
    if (feasibility_margin <= 0.0 || !strip_ok) return false;
    for (const auto& e : estimates)
      if (!e.ok) return false;
    return true;
  }
};

/// Residuals and a-priori estimate checks for a candidate solution of the
/// regularized linear problem (forcing h).
ResidualReport residual_report(const PhiMap& phi, const BoundaryLaw& law,
                               const InteriorFunction& h, const GridFunction& u,
                               std::optional<double> lambda1 = std::nullopt);

/// Same for the general system with right-hand side f.
ResidualReport residual_report(const PhiMap& phi, const BoundaryLaw& law,
                               const NonlinearField& f, const GridFunction& u,
                               std::optional<double> lambda1 = std::nullopt);

/// Same for the potential system with gradient field F and forcing h.
ResidualReport residual_report(const PhiMap& phi, const BoundaryLaw& law,
                               const PotentialField& F, const InteriorFunction& h,
                               const GridFunction& u,
                               std::optional<double> lambda1 = std::nullopt);

/// Independent small-instance oracle (N = 1, T <= 3): exhaustive merit scan
/// on a 41-point grid per free coordinate over the a-priori box, one
/// refinement pass around the best cell, then a Newton polish on the
/// first-order system with finite-difference Jacobians. Never calls the
/// production solvers.
GridFunction brute_force_solve(const PhiMap& phi, const BoundaryLaw& law,
                               const InteriorFunction& h);

struct EstimateSummary {
  int instances = 0;
  int violations = 0;
  // Signed margins: negative means the estimate held with room to spare.
  double worst_lipschitz_margin = -1e300;  // ||u_h-u_l||_T - sqrt(T)|h-l|_inf
  double worst_zero_margin = -1e300;       // ||u_h||_T - sqrt(T)|h|_inf
  double worst_pointwise_margin = -1e300;  // max|u| - (||u||_T/sqrt(T) + Ta)
  double worst_identity_error = 0.0;       // |O - omega - M|
  double worst_strip_margin = -1e300;      // |u(0)-u(T+1)| - (T+1)a
  bool ok() const { return violations == 0; }
};

/// Randomized estimate suite over `batch` instance pairs: solves both
/// instances, and checks the Lipschitz bound, the zero bound, the pointwise
/// bound, the strip condition and the bilinear identity at tolerance 1e-10.
/// Instances are seeded individually, so the result is identical for any
/// worker count.
EstimateSummary check_estimates(const PhiMap& phi, const BoundaryLaw& law, int T,
                                int batch, uint64_t seed, int workers = 1);

}  // namespace philap
