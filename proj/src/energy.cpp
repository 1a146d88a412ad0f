#include "philap/energy.hpp"

#include <cmath>
#include <random>

#include "philap/detail/anderson.hpp"
#include "philap/detail/assembly.hpp"
#include "philap/detail/spg.hpp"

namespace philap {

namespace {

using detail::barrier_gradient;
using detail::differences;
using detail::max_col_norm;
using detail::phi_columns;

VectorXd pair_of(const MatrixXd& u) {
  VectorXd z(2 * u.rows());
  z << u.col(0), u.col(u.cols() - 1);
  return z;
}

VectorXd flux_of(const MatrixXd& p) {
  VectorXd w(2 * p.rows());
  w << p.col(0), -p.col(p.cols() - 1);
  return w;
}

struct Residuals {
  double interior = 0.0;
  double boundary = 0.0;
};

// Residuals of the potential system -Delta[phi(Delta u)] = grad F + h.
Residuals potential_residuals(const PhiMap& phi, const BoundaryLaw& law,
                              const PotentialField& F, const InteriorFunction& h,
                              const MatrixXd& u) {
  const int T = static_cast<int>(u.cols()) - 2;
  const MatrixXd p = phi_columns(phi, differences(u));
  Residuals r;
  for (int n = 1; n <= T; ++n) {
    const VectorXd res = -(p.col(n) - p.col(n - 1)) - F.gradient(n, u.col(n)) -
                         h.values.col(n - 1);
    r.interior = std::max(r.interior, res.norm());
  }
  r.boundary = law_residual(law, pair_of(u), flux_of(p));
  return r;
}

// Diagonal-shift invariance of j = G + I_K, sampled: j(z + (c,c)) = j(z).
bool diag_shift_invariant(const BoundaryLaw& law, uint64_t seed) {
  if (!law.is_subdifferential()) return false;
  const auto& sd = law.subdiff();
  const int N = law.half_dim();
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int s = 0; s < 12; ++s) {
    const double scale = (s % 3 == 0) ? 0.3 : (s % 3 == 1 ? 1.0 : 7.0);
    VectorXd z(2 * N), shift(2 * N);
    VectorXd c(N);
    for (int i = 0; i < 2 * N; ++i) z[i] = scale * unif(rng);
    for (int i = 0; i < N; ++i) c[i] = scale * unif(rng);
    shift << c, c;
    const VectorXd pz = sd.K.project(z);
    if ((sd.K.project(z + shift) - (pz + shift)).norm() > 1e-9 * (1.0 + z.norm()))
      return false;
    if (std::abs(sd.G.value(pz + shift) - sd.G.value(pz)) >
        1e-9 * (1.0 + std::abs(sd.G.value(pz))))
      return false;
  }
  return true;
}

// Shift every coordinate mean into [0, omega_i).
void fold_mean(MatrixXd& u, const VectorXd& periods) {
  const VectorXd mean = u.rowwise().mean();
  for (int i = 0; i < u.rows(); ++i) {
    const double k = std::floor(mean[i] / periods[i]);
    if (k != 0.0) u.row(i).array() -= k * periods[i];
  }
}

MatrixXd random_feasible_start(int N, int T, double a, const ConvexSet& K,
                               std::mt19937_64& rng,
                               const std::optional<VectorXd>& cell) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  VectorXd xbar(N);
  for (int i = 0; i < N; ++i)
    xbar[i] = cell ? 0.5 * (*cell)[i] * (unif(rng) + 1.0) : 2.0 * unif(rng);
  MatrixXd u(N, T + 2);
  u.col(0) = xbar;
  for (int n = 1; n <= T + 1; ++n) {
    VectorXd d(N);
    for (int i = 0; i < N; ++i) d[i] = unif(rng);
    if (d.norm() > 0.0) d *= 0.3 * a * std::abs(unif(rng)) / d.norm();
    u.col(n) = u.col(n - 1) + d;
  }
  for (int attempt = 0; attempt < 8; ++attempt) {
    const VectorXd zp = K.project(pair_of(u));
    u.col(0) = zp.head(N);
    u.col(T + 1) = zp.tail(N);
    if (max_col_norm(differences(u)) < 0.9 * a) return u;
    const VectorXd mean = u.rowwise().mean();
    u = 0.5 * (u.colwise() - mean);
    u.colwise() += mean;
  }
  return MatrixXd::Zero(N, T + 2);
}

}  // namespace

PotentialField PotentialField::power_sin(const VectorXd& b, const VectorXd& c,
                                         double alpha, const VectorXd& nu) {
  if (b.size() != c.size())
    throw std::invalid_argument("power_sin: coefficient length mismatch");
  if (alpha <= 0.0) throw std::invalid_argument("power_sin: need alpha > 0");
  PotentialField F;
  F.dim = static_cast<int>(nu.size());
  F.horizon = static_cast<int>(b.size());
  F.value = [b, c, alpha, nu](int n, const VectorXd& v) {
    double cos_part = 0.0;
    for (int i = 0; i < v.size(); ++i) cos_part += nu[i] * (1.0 - std::cos(v[i]));
    const double r = v.norm();
    const double power = r == 0.0 ? 0.0 : std::pow(r, alpha + 1.0) / (alpha + 1.0);
    return b[n - 1] * power + c[n - 1] * cos_part;
  };
  F.gradient = [b, c, alpha, nu](int n, const VectorXd& v) {
    VectorXd g(v.size());
    for (int i = 0; i < v.size(); ++i) g[i] = c[n - 1] * nu[i] * std::sin(v[i]);
    const double r = v.norm();
    if (r > 0.0) g += b[n - 1] * std::pow(r, alpha - 1.0) * v;
    return g;
  };
  if (b.isZero(0.0))
    F.periods = VectorXd::Constant(nu.size(), 2.0 * M_PI);
  return F;
}

PotentialField PotentialField::periodic_multi(const VectorXd& c, const VectorXd& nu,
                                              const VectorXd& omega) {
  if (nu.size() != omega.size())
    throw std::invalid_argument("periodic_multi: nu/omega length mismatch");
  if ((omega.array() <= 0.0).any())
    throw std::invalid_argument("periodic_multi: periods must be positive");
  PotentialField F;
  F.dim = static_cast<int>(nu.size());
  F.horizon = static_cast<int>(c.size());
  F.value = [c, nu, omega](int n, const VectorXd& v) {
    double s = 0.0;
    for (int i = 0; i < v.size(); ++i)
      s += nu[i] * (1.0 - std::cos(2.0 * M_PI * v[i] / omega[i]));
    return c[n - 1] * s;
  };
  F.gradient = [c, nu, omega](int n, const VectorXd& v) {
    VectorXd g(v.size());
    for (int i = 0; i < v.size(); ++i) {
      const double w = 2.0 * M_PI / omega[i];
      g[i] = c[n - 1] * nu[i] * w * std::sin(w * v[i]);
    }
    return g;
  };
  F.periods = omega;
  return F;
}

PotentialField PotentialField::zero(int dim, int horizon) {
  PotentialField F;
  F.dim = dim;
  F.horizon = horizon;
  F.value = [](int, const VectorXd&) { return 0.0; };
  F.gradient = [](int, const VectorXd& v) { return VectorXd::Zero(v.size()); };
  return F;
}

PotentialField PotentialField::custom(
    int dim, int horizon, std::function<double(int, const VectorXd&)> value,
    std::function<VectorXd(int, const VectorXd&)> gradient,
    std::optional<VectorXd> periods) {
  PotentialField F;
  F.dim = dim;
  F.horizon = horizon;
  F.value = std::move(value);
  F.gradient = std::move(gradient);
  F.periods = std::move(periods);
  return F;
}

double energy_value(const PhiMap& phi, const BoundaryLaw& law, const PotentialField& F,
                    const InteriorFunction& h, const GridFunction& u) {
  if (!law.is_subdifferential())
    throw std::invalid_argument("energy_value: needs a subdifferential law");
  const double a = phi.radius();
  const int T = u.horizon();
  if (sup_diff(u) > a) return std::numeric_limits<double>::infinity();
  const auto& sd = law.subdiff();
  const VectorXd z = pair_of(u.values);
  if (sd.K.distance(z) > 1e-12 * (1.0 + z.norm()))
    return std::numeric_limits<double>::infinity();
  double val = detail::potential_sum(phi, differences(u.values)) + sd.G.value(z);
  for (int n = 1; n <= T; ++n)
    val -= F.value(n, u.at(n)) + h.values.col(n - 1).dot(u.at(n));
  return val;
}

namespace {

// Smooth part of the energy and its gradient on the open Delta ball.
struct EnergyAssembly {
  const PhiMap& phi;
  const SubdifferentialLaw& sd;
  const PotentialField& F;
  const InteriorFunction& h;
  int N, T;
  double a;

  double value(const MatrixXd& u) const {
    const MatrixXd du = differences(u);
    if (max_col_norm(du) >= a) return std::numeric_limits<double>::infinity();
    double val = detail::potential_sum(phi, du) + sd.G.value(pair_of(u));
    for (int n = 1; n <= T; ++n)
      val -= F.value(n, u.col(n)) + h.values.col(n - 1).dot(u.col(n));
    return val;
  }

  MatrixXd gradient(const MatrixXd& u) const {
    const MatrixXd p = phi_columns(phi, differences(u));
    MatrixXd g = barrier_gradient(p);
    for (int n = 1; n <= T; ++n)
      g.col(n) -= F.gradient(n, u.col(n)) + h.values.col(n - 1);
    const VectorXd gp = sd.G.gradient(pair_of(u));
    g.col(0) += gp.head(N);
    g.col(T + 1) += gp.tail(N);
    return g;
  }
};

}  // namespace

EnergyReport minimize_energy(const PhiMap& phi, const BoundaryLaw& law,
                             const PotentialField& F, const InteriorFunction& h,
                             const SolveOptions& opts) {
  if (!law.is_subdifferential())
    throw std::invalid_argument("minimize_energy: needs a subdifferential law");
  const int N = F.dim, T = F.horizon;
  if (h.dim() != N || h.horizon() != T)
    throw std::invalid_argument("minimize_energy: forcing dimension mismatch");
  const double a = phi.radius();
  const auto& sd = law.subdiff();
  const bool folding = F.periods && diag_shift_invariant(law, opts.seed);

  EnergyAssembly asm_{phi, sd, F, h, N, T, a};
  std::mt19937_64 rng(opts.seed);

  const int starts = 8;
  const int per_start_cap = std::min(opts.max_iters, 40000);

  bool have_best = false, best_converged = false;
  MatrixXd best;
  double best_energy = std::numeric_limits<double>::infinity();
  long long total_iters = 0;

  for (int s = 0; s < starts; ++s) {
    MatrixXd x0 = s == 0 ? MatrixXd::Zero(N, T + 2)
                         : random_feasible_start(N, T, a, sd.K, rng,
                                                 folding ? F.periods : std::nullopt);
    if (folding) fold_mean(x0, *F.periods);

    Residuals last;
    detail::SpgProblem prob;
    prob.value = [&](const MatrixXd& u) { return asm_.value(u); };
    prob.gradient = [&](const MatrixXd& u) { return asm_.gradient(u); };
    prob.project = [&](const MatrixXd& u) {
      MatrixXd out = u;
      const VectorXd zp = sd.K.project(pair_of(u));
      out.col(0) = zp.head(N);
      out.col(T + 1) = zp.tail(N);
      return out;
    };
    prob.max_step = [&](const MatrixXd& u, const MatrixXd& g) {
      return detail::max_feasible_step(u, g, a);
    };
    prob.stop = [&](const MatrixXd& u, int) {
      if (opts.iterate_observer) opts.iterate_observer(GridFunction(u));
      last = potential_residuals(phi, law, F, h, u);
      return last.interior <= opts.tol_residual &&
             last.boundary <= opts.tol_residual;
    };
    detail::SpgOptions sopts;
    sopts.max_iters = per_start_cap;
    sopts.step_safety = opts.step_safety;
    auto out = detail::spg_minimize(prob, x0, sopts);
    total_iters += out.iterations;

    MatrixXd pt = out.x;
    if (folding) fold_mean(pt, *F.periods);
    const double e = asm_.value(pt);
    const bool better = out.converged
                            ? (!best_converged || e < best_energy)
                            : (!have_best || (!best_converged && e < best_energy));
    if (better) {
      best = pt;
      best_energy = e;
      best_converged = out.converged;
      have_best = true;
    }
  }

  EnergyReport rep;
  rep.point = GridFunction(best);
  rep.kind = EnergyReport::Kind::minimizer;
  rep.energy = energy_value(phi, law, F, h, rep.point);
  const Residuals r = potential_residuals(phi, law, F, h, best);
  rep.interior_residual = r.interior;
  rep.boundary_residual = r.boundary;
  rep.feasibility_margin = a - sup_diff(rep.point);
  rep.strip_ok =
      (best.col(0) - best.col(T + 1)).norm() < (T + 1) * a;
  rep.iterations = static_cast<int>(std::min<long long>(total_iters, 1000000000));
  rep.converged = best_converged;

  if (opts.sample_reduced_curve) {
    for (int axis = 0; axis < N; ++axis) {
      for (int k = 0; k <= 20; ++k) {
        const double t = -2.0 + 0.2 * k;
        MatrixXd shifted = best;
        shifted.row(axis).array() += t;
        ReducedSample s{axis, t, asm_.value(shifted)};
        rep.reduced_curve.push_back(s);
      }
    }
  }
  return rep;
}

Lambda1Result lambda1_estimate(double radius, const BoundaryLaw& law, int T, int N,
                               const SolveOptions& opts) {
  const bool subdiff = law.is_subdifferential();
  auto cone_project = [&](MatrixXd u) {
    if (!subdiff) return u;  // matrix laws have full domain
    const VectorXd zp = law.subdiff().K.project_cone_hull(pair_of(u));
    u.col(0) = zp.head(N);
    u.col(u.cols() - 1) = zp.tail(N);
    return u;
  };
  auto rayleigh = [&](const MatrixXd& u) {
    const MatrixXd d = differences(u);
    const double den = u.middleCols(1, T).squaredNorm();
    return d.squaredNorm() / den;
  };
  auto rayleigh_gradient = [&](const MatrixXd& u, double R) {
    const MatrixXd d = differences(u);
    MatrixXd g = MatrixXd::Zero(N, T + 2);
    g.col(0) = -2.0 * d.col(0);
    for (int n = 1; n <= T; ++n) g.col(n) = 2.0 * (d.col(n - 1) - d.col(n));
    g.col(T + 1) = 2.0 * d.col(T);
    const double den = u.middleCols(1, T).squaredNorm();
    g.middleCols(1, T) -= 2.0 * R * u.middleCols(1, T);
    return MatrixXd(g / den);
  };

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  double best_val = std::numeric_limits<double>::infinity();
  MatrixXd best;

  const int starts = 10;
  for (int s = 0; s < starts; ++s) {
    MatrixXd w(N, T + 2);
    if (s == 0) {
      w.setZero();
      for (int n = 1; n <= T; ++n)
        w(0, n) = std::sin(M_PI * n / (T + 1));  // Dirichlet ground-state shape
    } else if (s == 1) {
      w.setOnes();
    } else if (s == 2) {
      w.setZero();
      w(0, 1) = 1.0;  // single interior bump
    } else {
      for (int c = 0; c < T + 2; ++c)
        for (int r = 0; r < N; ++r) w(r, c) = unif(rng);
    }
    w = cone_project(w);
    double nt = w.middleCols(1, T).norm();
    if (nt < 1e-12) continue;
    w /= nt;

    double R = rayleigh(w);
    double step = 0.5;
    for (int it = 0; it < 8000; ++it) {
      const MatrixXd g = rayleigh_gradient(w, R);
      bool moved = false;
      for (int back = 0; back < 40; ++back) {
        MatrixXd cand = cone_project(w - step * g);
        const double cn = cand.middleCols(1, T).norm();
        if (cn < 1e-14) {
          step *= 0.5;
          continue;
        }
        cand /= cn;
        const double Rc = rayleigh(cand);
        if (Rc < R - 1e-16) {
          w = cand;
          R = Rc;
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
      step *= 1.6;
    }
    if (R < best_val) {
      best_val = R;
      best = w;
    }
  }

  Lambda1Result out;
  out.value = best_val < 1e-12 ? 0.0 : best_val;
  // Scale the witness into the feasible set: Delta bound strictly inside,
  // boundary pair shrunk back into the law domain.
  MatrixXd m = best;
  const double sd = max_col_norm(differences(m));
  if (sd > 0.0) m *= 0.5 * radius / sd;
  if (subdiff) {
    const auto& K = law.subdiff().K;
    for (int k = 0; k < 80 && K.distance(pair_of(m)) > 1e-12; ++k) m *= 0.5;
  }
  out.minimizer = GridFunction(m);
  return out;
}

EnergyReport saddle_search(const PhiMap& phi, const BoundaryLaw& law,
                           const PotentialField& F, const InteriorFunction& h,
                           const SolveOptions& opts) {
  if (!law.is_subdifferential())
    throw std::invalid_argument("saddle_search: needs a subdifferential law");
  const int N = F.dim, T = F.horizon;
  const double a = phi.radius();
  const auto& sd = law.subdiff();

  // Preconditions: j vanishes on the diagonal, j bounded on D(j); sampled.
  {
    std::mt19937_64 rng(opts.seed ^ 0xabcdef12345ULL);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int s = 0; s < 10; ++s) {
      const double scale = (s % 2 == 0) ? 1.0 : 25.0;
      VectorXd x(N);
      for (int i = 0; i < N; ++i) x[i] = scale * unif(rng);
      VectorXd z(2 * N);
      z << x, x;
      if (sd.K.distance(z) > 1e-9 * (1.0 + z.norm()) ||
          std::abs(sd.G.value(z)) > 1e-9 * (1.0 + z.norm()))
        throw std::invalid_argument("saddle_search: j must vanish on the diagonal");
    }
    double small_max = 0.0, large_max = 0.0;
    for (int s = 0; s < 40; ++s) {
      const double scale = (s < 20) ? 1.0 : 1000.0;
      VectorXd z(2 * N);
      for (int i = 0; i < 2 * N; ++i) z[i] = scale * unif(rng);
      const double g = std::abs(sd.G.value(sd.K.project(z)));
      (s < 20 ? small_max : large_max) = std::max(s < 20 ? small_max : large_max, g);
    }
    if (large_max > 100.0 * (1.0 + small_max) && large_max > 1.0)
      throw std::invalid_argument("saddle_search: j must be bounded on its domain");
  }

  EnergyAssembly asm_{phi, sd, F, h, N, T, a};

  // Inner minimization over zero-mean oscillations with the mean pinned at
  // xbar. The pair projection preserves means for diagonal-shift invariant
  // laws, so composing it with the mean re-pin projects exactly.
  MatrixXd warm = MatrixXd::Zero(N, T + 2);
  long long total_iters = 0;
  auto inner_min = [&](const VectorXd& xbar, const MatrixXd& start) {
    detail::SpgProblem prob;
    prob.value = [&](const MatrixXd& u) { return asm_.value(u); };
    prob.gradient = [&](const MatrixXd& u) {
      MatrixXd g = asm_.gradient(u);
      g.colwise() -= VectorXd(g.rowwise().mean());
      return g;
    };
    prob.project = [&](const MatrixXd& u) {
      MatrixXd out = u;
      const VectorXd zp = sd.K.project(pair_of(u));
      out.col(0) = zp.head(N);
      out.col(T + 1) = zp.tail(N);
      out.colwise() += VectorXd(xbar - out.rowwise().mean());
      return out;
    };
    prob.max_step = [&](const MatrixXd& u, const MatrixXd& g) {
      return detail::max_feasible_step(u, g, a);
    };
    prob.stop = [&](const MatrixXd& u, int) {
      const MatrixXd g = prob.gradient(u);
      return g.norm() <= 1e-10 * (1.0 + u.norm());
    };
    detail::SpgOptions sopts;
    sopts.max_iters = 20000;
    sopts.step_safety = opts.step_safety;
    auto out = detail::spg_minimize(prob, start, sopts);
    total_iters += out.iterations;
    return out.x;
  };
  auto m_at = [&](const VectorXd& xbar) {
    MatrixXd start = warm;
    start.colwise() += VectorXd(xbar - start.rowwise().mean());
    const MatrixXd u = inner_min(xbar, start);
    return std::pair<double, MatrixXd>(asm_.value(u), u);
  };

  // Outer maximization of the reduced function from xbar = 0.
  VectorXd xbar = VectorXd::Zero(N);
  auto [m0, u0] = m_at(xbar);
  warm = u0;
  double ascent_step = 1.0;
  for (int it = 0; it < 120; ++it) {
    VectorXd grad(N);
    const double fd = 1e-4 * (1.0 + xbar.norm());
    for (int i = 0; i < N; ++i) {
      VectorXd xp = xbar, xm = xbar;
      xp[i] += fd;
      xm[i] -= fd;
      grad[i] = (m_at(xp).first - m_at(xm).first) / (2.0 * fd);
    }
    if (grad.norm() <= 1e-7) break;
    bool accepted = false;
    for (int back = 0; back < 30; ++back) {
      const VectorXd cand = xbar + ascent_step * grad;
      auto [mc, uc] = m_at(cand);
      if (mc > m0 + 1e-4 * ascent_step * grad.squaredNorm()) {
        xbar = cand;
        m0 = mc;
        warm = uc;
        accepted = true;
        break;
      }
      ascent_step *= 0.5;
    }
    if (!accepted) break;
    ascent_step *= 1.5;
  }

  // Polish into a critical point through the regularized solution operator.
  SolveOptions inner_opts;
  inner_opts.tol_residual = std::max(1e-13, 0.01 * opts.tol_residual);
  inner_opts.max_iters = std::min(opts.max_iters, 30000);
  auto fixed_point_map = [&](const MatrixXd& u) {
    MatrixXd l(N, T);
    for (int n = 1; n <= T; ++n)
      l.col(n - 1) = u.col(n) + F.gradient(n, u.col(n)) + h.values.col(n - 1);
    SolveOptions io = inner_opts;
    io.initial = GridFunction(u);
    SolveReport rep;
    try {
      rep = solve_q_subdiff(phi, law, InteriorFunction(l), io);
    } catch (const std::invalid_argument&) {
      io.initial.reset();
      rep = solve_q_subdiff(phi, law, InteriorFunction(l), io);
    }
    total_iters += rep.iterations;
    return rep.solution.values;
  };
  auto residual_of = [&](const MatrixXd& u) {
    const Residuals r = potential_residuals(phi, law, F, h, u);
    return std::max(r.interior, r.boundary);
  };

  MatrixXd u = warm;
  MatrixXd best = u;
  double best_res = residual_of(u);
  detail::Anderson mixer(5);
  int strikes = 0;
  for (int it = 0; it < 300 && best_res > opts.tol_residual && strikes < 3; ++it) {
    MatrixXd fu;
    try {
      fu = fixed_point_map(u);
    } catch (const std::exception&) {
      u = best;
      mixer.reset();
      ++strikes;
      continue;
    }
    const Eigen::Map<const VectorXd> xv(u.data(), u.size());
    const Eigen::Map<const VectorXd> fv(fu.data(), fu.size());
    VectorXd candv = mixer.next(xv, fv);
    MatrixXd cand = Eigen::Map<const MatrixXd>(candv.data(), N, T + 2);
    if (!cand.allFinite() || max_col_norm(differences(cand)) >= a) cand = fu;
    double res = residual_of(cand);
    if (!(res < 4.0 * best_res)) {
      cand = fu;  // safeguard: plain Picard step
      res = residual_of(cand);
      mixer.reset();
    }
    if (!std::isfinite(res) || res > std::max(100.0 * best_res, 1e3)) {
      u = best;  // the map is wandering; restart from the best point
      mixer.reset();
      ++strikes;
      continue;
    }
    u = cand;
    if (res < best_res) {
      best_res = res;
      best = u;
    }
  }

  EnergyReport rep;
  rep.point = GridFunction(best);
  rep.kind = EnergyReport::Kind::saddle_candidate;
  rep.energy = energy_value(phi, law, F, h, rep.point);
  const Residuals r = potential_residuals(phi, law, F, h, best);
  rep.interior_residual = r.interior;
  rep.boundary_residual = r.boundary;
  rep.feasibility_margin = a - sup_diff(rep.point);
  rep.strip_ok = (best.col(0) - best.col(T + 1)).norm() < (T + 1) * a;
  rep.iterations = static_cast<int>(std::min<long long>(total_iters, 1000000000));
  rep.converged = r.interior <= opts.tol_residual && r.boundary <= opts.tol_residual;

  // Constant-direction descent witness: the saddle is a maximum along
  // constants, so the energy must drop when the mean is shifted.
  const double e0 = rep.energy;
  double best_drop = 0.0;
  VectorXd witness;
  for (int i = 0; i < N; ++i) {
    for (double sgn : {1.0, -1.0}) {
      for (double eta : {0.5, 0.25, 0.1}) {
        MatrixXd shifted = best;
        shifted.row(i).array() += sgn * eta;
        const double e = asm_.value(shifted);
        if (e0 - e > best_drop) {
          best_drop = e0 - e;
          witness = sgn * VectorXd::Unit(N, i);
        }
      }
    }
  }
  if (best_drop > 0.0) {
    rep.descent_witness = witness;
    rep.witness_drop = best_drop;
  }

  if (opts.sample_reduced_curve) {
    for (int axis = 0; axis < N; ++axis) {
      for (int k = 0; k <= 20; ++k) {
        const double t = -2.0 + 0.2 * k;
        VectorXd xq = xbar;
        xq[axis] += t;
        rep.reduced_curve.push_back(ReducedSample{axis, t, m_at(xq).first});
      }
    }
  }
  return rep;
}

}  // namespace philap
