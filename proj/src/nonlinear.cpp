#include "philap/nonlinear.hpp"

#include <cmath>
#include <random>

#include "philap/detail/anderson.hpp"

namespace philap {

namespace {
VectorXd power_term(const VectorXd& x, double exponent) {
  // |x|^{exponent-1} x with the continuous extension 0 at the origin.
  const double r = x.norm();
  if (r == 0.0) return VectorXd::Zero(x.size());
  return std::pow(r, exponent - 1.0) * x;
}
}  // namespace

NonlinearField NonlinearField::coupled_matrix(const MatrixXd& coeffs,
                                              const InteriorFunction& h) {
  const int T = h.horizon();
  if (coeffs.rows() != T || coeffs.cols() != T)
    throw std::invalid_argument("coupled_matrix: coefficient matrix must be T x T");
  NonlinearField f;
  f.dim = h.dim();
  f.horizon = T;
  f.evaluator = [coeffs, h, T](int n, const GridFunction& u) {
    double coupling = 0.0;
    for (int j = 1; j <= T; ++j)
      if (j != n) coupling += coeffs(n - 1, j - 1) * u.at(j).squaredNorm();
    const double un2 = u.at(n).squaredNorm();
    const double lead = coeffs(n - 1, n - 1) - 1.0 + coupling / (1.0 + un2);
    const double damp =
        1.0 + u.at(n).norm() + (u.at(T + 1) - u.at(0)).norm();
    return VectorXd(lead * u.at(n) + h.at(n) / damp);
  };
  return f;
}

NonlinearField NonlinearField::dissipative_plus_bounded(const VectorXd& kappa,
                                                        double p, const VectorXd& c,
                                                        const InteriorFunction& h) {
  const int T = h.horizon();
  if (kappa.size() != T || c.size() != T)
    throw std::invalid_argument("dissipative_plus_bounded: coefficient length mismatch");
  NonlinearField f;
  f.dim = h.dim();
  f.horizon = T;
  f.evaluator = [kappa, p, c, h](int n, const GridFunction& u) {
    const VectorXd prev = u.at(n - 1);
    return VectorXd(-kappa[n - 1] * power_term(u.at(n), p - 1.0) +
                    c[n - 1] * prev / (1.0 + prev.norm()) + h.at(n));
  };
  return f;
}

NonlinearField NonlinearField::delay_difference(double eps, double p,
                                                const InteriorFunction& h) {
  NonlinearField f;
  f.dim = h.dim();
  f.horizon = h.horizon();
  f.evaluator = [eps, p, h](int n, const GridFunction& u) {
    const VectorXd d = u.at(n + 1) - u.at(n);
    return VectorXd(-eps * power_term(u.at(n), p - 1.0) +
                    d / std::sqrt(1.0 + d.squaredNorm()) + h.at(n));
  };
  return f;
}

NonlinearField NonlinearField::pendulum_power(const VectorXd& b, const VectorXd& c,
                                              double alpha, const VectorXd& nu,
                                              const InteriorFunction& h) {
  const int T = h.horizon();
  if (b.size() != T || c.size() != T)
    throw std::invalid_argument("pendulum_power: coefficient length mismatch");
  if (nu.size() != h.dim())
    throw std::invalid_argument("pendulum_power: nu must have dimension N");
  NonlinearField f;
  f.dim = h.dim();
  f.horizon = T;
  f.evaluator = [b, c, alpha, nu, h](int n, const GridFunction& u) {
    const VectorXd v = u.at(n);
    VectorXd sines(v.size());
    for (int i = 0; i < v.size(); ++i) sines[i] = nu[i] * std::sin(v[i]);
    return VectorXd(b[n - 1] * power_term(v, alpha) + c[n - 1] * sines + h.at(n));
  };
  return f;
}

NonlinearField NonlinearField::custom(
    int dim, int horizon, std::function<VectorXd(int, const GridFunction&)> f) {
  NonlinearField out;
  out.dim = dim;
  out.horizon = horizon;
  out.evaluator = std::move(f);
  return out;
}

InteriorFunction apply_nf(const NonlinearField& f, const GridFunction& u) {
  const int T = u.horizon();
  MatrixXd vals(u.dim(), T);
  for (int n = 1; n <= T; ++n) vals.col(n - 1) = f(n, u) + u.at(n);
  return InteriorFunction(std::move(vals));
}

namespace {

double interior_f_residual(const PhiMap& phi, const NonlinearField& f,
                           const GridFunction& u) {
  const int T = u.horizon();
  const MatrixXd d = forward_differences(u);
  MatrixXd p(u.dim(), T + 1);
  for (int k = 0; k <= T; ++k) p.col(k) = phi.value(d.col(k));
  double res = 0.0;
  for (int n = 1; n <= T; ++n)
    res = std::max(res, (-(p.col(n) - p.col(n - 1)) - f(n, u)).norm());
  return res;
}

}  // namespace

SolveReport picard_solve(const PhiMap& phi, const BoundaryLaw& law,
                         const NonlinearField& f, const SolveOptions& opts,
                         const HomotopyOptions& homotopy) {
  if (homotopy.mu_grid.empty() || homotopy.mu_grid.back() != 1.0)
    throw std::invalid_argument("picard_solve: mu grid must end at 1");
  for (size_t i = 1; i < homotopy.mu_grid.size(); ++i)
    if (!(homotopy.mu_grid[i] > homotopy.mu_grid[i - 1]))
      throw std::invalid_argument("picard_solve: mu grid must be increasing");
  if (!(homotopy.damping > 0.0 && homotopy.damping <= 1.0))
    throw std::invalid_argument("picard_solve: damping must lie in (0, 1]");

  const int N = f.dim, T = f.horizon;
  SolveOptions inner = opts;
  inner.tol_residual = std::max(2e-12, 0.01 * opts.tol_residual);
  inner.initial.reset();
  inner.iterate_observer = nullptr;

  auto apply_S = [&](const GridFunction& u) {
    return solve_q_general(phi, law, apply_nf(f, u), inner).solution;
  };
  auto flat = [](const GridFunction& u) {
    return VectorXd(Eigen::Map<const VectorXd>(u.values.data(), u.values.size()));
  };
  auto unflat = [&](const VectorXd& v) {
    GridFunction u;
    u.values = Eigen::Map<const MatrixXd>(v.data(), N, T + 2);
    return u;
  };

  GridFunction u = GridFunction::zero(N, T);
  int evals = 0;
  double gap = std::numeric_limits<double>::infinity();
  const int stage_cap = std::max(50, opts.max_iters / 200);

  for (double mu : homotopy.mu_grid) {
    detail::Anderson mixer(homotopy.anderson_depth);
    VectorXd x = flat(u);
    VectorXd Tx = mu * flat(apply_S(u));
    ++evals;
    gap = (Tx - x).norm();
    for (int it = 0; it < stage_cap && gap > opts.tol_residual; ++it) {
      VectorXd cand = mixer.next(x, Tx);
      if (!cand.allFinite()) cand = x + homotopy.damping * (Tx - x);
      VectorXd Tcand;
      double cgap;
      try {
        Tcand = mu * flat(apply_S(unflat(cand)));
        ++evals;
        cgap = (Tcand - cand).norm();
      } catch (const std::exception&) {
        cgap = std::numeric_limits<double>::infinity();
      }
      if (!(cgap < gap)) {
        // Safeguard: plain damped step.
        VectorXd damped = x + homotopy.damping * (Tx - x);
        try {
          VectorXd Tdamped = mu * flat(apply_S(unflat(damped)));
          ++evals;
          const double dgap = (Tdamped - damped).norm();
          if (std::isfinite(cgap) && cgap < dgap) {
            x = cand;
            Tx = Tcand;
            gap = cgap;
          } else {
            x = damped;
            Tx = Tdamped;
            gap = dgap;
            mixer.reset();
          }
        } catch (const std::exception&) {
          break;  // stage stalled; report what we have
        }
      } else {
        x = cand;
        Tx = Tcand;
        gap = cgap;
      }
    }
    u = unflat(x);
  }

  SolveReport rep;
  rep.solution = u;
  rep.interior_residual = interior_f_residual(phi, f, u);
  {
    const MatrixXd d = forward_differences(u);
    MatrixXd p(N, T + 1);
    for (int k = 0; k <= T; ++k) p.col(k) = phi.value(d.col(k));
    VectorXd w(2 * N);
    w << p.col(0), -p.col(T);
    VectorXd z(2 * N);
    z << u.values.col(0), u.values.col(T + 1);
    rep.boundary_residual = law_residual(law, z, w);
  }
  rep.feasibility_margin = phi.radius() - sup_diff(u);
  rep.strip_ok = (u.values.col(0) - u.values.col(T + 1)).norm() <
                 (T + 1) * phi.radius();
  rep.iterations = evals;
  rep.converged = gap <= opts.tol_residual &&
                  rep.interior_residual <= opts.tol_residual &&
                  rep.boundary_residual <= opts.tol_residual &&
                  rep.feasibility_margin > 0.0;
  return rep;
}

Thf1Report check_thf1(const NonlinearField& f, const MatrixXd& c_matrix,
                      double c_const, int samples, uint64_t seed) {
  const int T = f.horizon, N = f.dim;
  if (c_matrix.rows() != T || c_matrix.cols() != T)
    throw std::invalid_argument("check_thf1: comparison matrix must be T x T");

  Thf1Report rep;
  rep.column_sums_ok = true;
  for (int j = 0; j < T; ++j)
    if (!(c_matrix.col(j).sum() < 1.0)) rep.column_sums_ok = false;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const double scales[] = {0.5, 1.0, 2.0, 5.0, 10.0};
  double worst = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const double scale = scales[s % 5];
    GridFunction u = GridFunction::zero(N, T);
    for (int c = 0; c < u.values.cols(); ++c)
      for (int r = 0; r < N; ++r) u.values(r, c) = scale * unif(rng);
    for (int n = 1; n <= T; ++n) {
      double bound = (c_matrix(n - 1, n - 1) - 1.0) * u.at(n).squaredNorm() + c_const;
      for (int j = 1; j <= T; ++j)
        if (j != n) bound += c_matrix(n - 1, j - 1) * u.at(j).squaredNorm();
      worst = std::max(worst, f(n, u).dot(u.at(n)) - bound);
    }
  }
  rep.worst_violation = worst;
  return rep;
}

}  // namespace philap
