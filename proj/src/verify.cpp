#include "philap/verify.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <thread>

#include "philap/detail/assembly.hpp"

namespace philap {

namespace {

using detail::differences;
using detail::phi_columns;

VectorXd pair_of(const MatrixXd& u) {
  VectorXd z(2 * u.rows());
  z << u.col(0), u.col(u.cols() - 1);
  return z;
}

void base_report(const PhiMap& phi, const BoundaryLaw& law, const GridFunction& u,
                 const MatrixXd* p, std::optional<double> lambda1,
                 ResidualReport& rep) {
  const int T = u.horizon();
  const double a = phi.radius();
  if (p) {
    VectorXd w(2 * u.dim());
    w << p->col(0), -p->col(T);
    rep.boundary_residual = law_residual(law, pair_of(u.values), w);
  } else {
    rep.boundary_residual = std::numeric_limits<double>::infinity();
  }
  rep.feasibility_margin = a - sup_diff(u);
  const double gap = (u.values.col(0) - u.values.col(T + 1)).norm();
  rep.strip_ok = gap < (T + 1) * a;

  double maxu = 0.0;
  for (int m = 0; m <= T + 1; ++m) maxu = std::max(maxu, u.at(m).norm());
  const double norm_T = u.values.middleCols(1, T).norm();

  rep.estimates.push_back({"pointwise_bound", maxu, norm_T / std::sqrt(T) + T * a,
                           maxu <= norm_T / std::sqrt(T) + T * a + 1e-10});
  rep.estimates.push_back({"strip", gap, (T + 1) * a, gap <= (T + 1) * a + 1e-10});
  if (lambda1 && *lambda1 > 1e-8) {
    const double rhs = a * (std::sqrt((T + 1.0) / (T * *lambda1)) + T);
    rep.estimates.push_back({"uniform_bound", maxu, rhs, maxu <= rhs + 1e-10});
  }
}

}  // namespace

ResidualReport residual_report(const PhiMap& phi, const BoundaryLaw& law,
                               const InteriorFunction& h, const GridFunction& u,
                               std::optional<double> lambda1) {
  const int T = u.horizon();
  ResidualReport rep;
  if (sup_diff(u) >= phi.radius()) {
    // phi is undefined on some difference; the margin carries the verdict.
    rep.interior_inf_norm = std::numeric_limits<double>::infinity();
    base_report(phi, law, u, nullptr, lambda1, rep);
    return rep;
  }
  const MatrixXd p = phi_columns(phi, differences(u.values));
  for (int n = 1; n <= T; ++n)
    rep.interior_inf_norm =
        std::max(rep.interior_inf_norm,
                 (-(p.col(n) - p.col(n - 1)) + u.at(n) - h.at(n)).norm());
  base_report(phi, law, u, &p, lambda1, rep);
  return rep;
}

ResidualReport residual_report(const PhiMap& phi, const BoundaryLaw& law,
                               const NonlinearField& f, const GridFunction& u,
                               std::optional<double> lambda1) {
  const int T = u.horizon();
  ResidualReport rep;
  if (sup_diff(u) >= phi.radius()) {
    rep.interior_inf_norm = std::numeric_limits<double>::infinity();
    base_report(phi, law, u, nullptr, lambda1, rep);
    return rep;
  }
  const MatrixXd p = phi_columns(phi, differences(u.values));
  for (int n = 1; n <= T; ++n)
    rep.interior_inf_norm = std::max(
        rep.interior_inf_norm, (-(p.col(n) - p.col(n - 1)) - f(n, u)).norm());
  base_report(phi, law, u, &p, lambda1, rep);
  return rep;
}

ResidualReport residual_report(const PhiMap& phi, const BoundaryLaw& law,
                               const PotentialField& F, const InteriorFunction& h,
                               const GridFunction& u, std::optional<double> lambda1) {
  NonlinearField f = NonlinearField::custom(
      F.dim, F.horizon, [&F, &h](int n, const GridFunction& v) {
        return VectorXd(F.gradient(n, v.at(n)) + h.at(n));
      });
  return residual_report(phi, law, f, u, lambda1);
}

// ---------------------------------------------------------------------------
// Brute-force oracle
// ---------------------------------------------------------------------------

namespace {

// Scalar shorthand for the N = 1 oracle.
struct ScalarPhi {
  const PhiMap& phi;
  double a;
  double eval(double d) const {
    const double s = std::abs(d);
    return s == 0.0 ? 0.0 : (d > 0 ? 1.0 : -1.0) * phi.profile(s);
  }
  double pot(double d) const { return phi.potential_radial(std::abs(d)); }
};

struct OracleSetup {
  int T = 0;
  bool matrix_mode = false;
  bool affine_mode = false;
  int params = 0;   // free boundary parameters in affine mode
  VectorXd Koff;    // affine offset (dim 2)
  MatrixXd Kbasis;  // 2 x params
  const SmoothBoundaryFn* G = nullptr;
  const ConvexSet* K = nullptr;
  const MatrixXd* M = nullptr;
  VectorXd h;  // T entries

  int dims() const { return T + (affine_mode ? params : 2); }
};

// Unknown layout: x[0..T-1] = u(1..T); then the boundary block (affine
// parameters, or u(0) and u(T+1) directly).
void unknowns_to_trace(const OracleSetup& s, const double* x,
                       std::vector<double>& u) {
  u.assign(s.T + 2, 0.0);
  for (int n = 1; n <= s.T; ++n) u[n] = x[n - 1];
  if (s.affine_mode) {
    VectorXd wb(s.params);
    for (int i = 0; i < s.params; ++i) wb[i] = x[s.T + i];
    const VectorXd z = s.Koff + s.Kbasis * wb;
    u[0] = z[0];
    u[s.T + 1] = z[1];
  } else {
    u[0] = x[s.T];
    u[s.T + 1] = x[s.T + 1];
  }
}

// First-order square system whose roots are the oracle solutions
// (stationarity of the convex merit for subdifferential laws; the
// equation-plus-boundary system for matrix laws).
VectorXd oracle_system(const OracleSetup& s, const ScalarPhi& sp,
                       const VectorXd& x) {
  std::vector<double> u;
  unknowns_to_trace(s, x.data(), u);
  VectorXd F(s.dims());
  for (int n = 1; n <= s.T; ++n)
    F[n - 1] = -(sp.eval(u[n + 1] - u[n]) - sp.eval(u[n] - u[n - 1])) + u[n] -
               s.h[n - 1];
  VectorXd z(2), w(2);
  z << u[0], u[s.T + 1];
  w << sp.eval(u[1] - u[0]), -sp.eval(u[s.T + 1] - u[s.T]);
  if (s.matrix_mode) {
    F.tail(2) = w - (*s.M) * z;
  } else if (s.affine_mode) {
    if (s.params > 0)
      F.tail(s.params) = s.Kbasis.transpose() * (w - s.G->gradient(z));
  } else {
    F.tail(2) = w - s.G->gradient(z);  // strip inactive at solutions
  }
  return F;
}

bool oracle_feasible(const OracleSetup& s, const ScalarPhi& sp, const VectorXd& x) {
  std::vector<double> u;
  unknowns_to_trace(s, x.data(), u);
  for (int n = 0; n <= s.T; ++n)
    if (std::abs(u[n + 1] - u[n]) >= sp.a * (1.0 - 1e-14)) return false;
  return true;
}

bool newton_polish(const OracleSetup& s, const ScalarPhi& sp, VectorXd& x) {
  const int d = s.dims();
  for (int it = 0; it < 120; ++it) {
    const VectorXd F = oracle_system(s, sp, x);
    const double fn = F.lpNorm<Eigen::Infinity>();
    if (fn <= 1e-11) return true;
    MatrixXd J(d, d);
    bool bad = false;
    for (int j = 0; j < d && !bad; ++j) {
      const double step = 1e-7 * (1.0 + std::abs(x[j]));
      VectorXd xp = x, xm = x;
      xp[j] += step;
      xm[j] -= step;
      if (!oracle_feasible(s, sp, xp)) xp = x;
      if (!oracle_feasible(s, sp, xm)) xm = x;
      if (xp[j] == xm[j]) {
        bad = true;
        break;
      }
      J.col(j) = (oracle_system(s, sp, xp) - oracle_system(s, sp, xm)) /
                 (xp[j] - xm[j]);
    }
    if (bad) return false;
    const VectorXd dir = J.partialPivLu().solve(-F);
    if (!dir.allFinite()) return false;
    double t = 1.0;
    bool moved = false;
    for (int back = 0; back < 60; ++back, t *= 0.5) {
      const VectorXd cand = x + t * dir;
      if (!oracle_feasible(s, sp, cand)) continue;
      if (oracle_system(s, sp, cand).lpNorm<Eigen::Infinity>() <
          fn * (1.0 - 1e-4 * t) + 1e-16) {
        x = cand;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return oracle_system(s, sp, x).lpNorm<Eigen::Infinity>() <= 1e-10;
}

struct TopList {
  std::vector<std::pair<double, std::vector<double>>> items;
  void offer(double merit, const std::vector<double>& x) {
    items.emplace_back(merit, x);
    std::sort(items.begin(), items.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    if (items.size() > 12) items.pop_back();
  }
};

// Exhaustive scan over 41-point grids (offset + i * spacing per unknown)
// with chain pruning |Delta| < a and merit accumulated along the descent.
// All chain values live on a shared-spacing lattice, so phi and Phi are
// evaluated once per distinct difference and only looked up in the loops.
void oracle_scan(const OracleSetup& s, const ScalarPhi& sp,
                 const std::vector<double>& offsets, double spacing,
                 TopList& top) {
  constexpr int kPts = 41;
  const int T = s.T;
  const double a = sp.a;
  std::vector<double> x(s.dims(), 0.0);
  std::vector<double> u(T + 2, 0.0);

  // Lattice tables for a trace edge whose endpoints sit on two grids with a
  // common spacing: diff = base + (i - j) * spacing, 81 cases.
  struct EdgeTable {
    std::array<double, 2 * kPts - 1> pot{}, phi{};
    std::array<bool, 2 * kPts - 1> ok{};
    void fill(const ScalarPhi& sp, double base, double spacing, bool with_phi) {
      for (int d = 0; d < 2 * kPts - 1; ++d) {
        const double diff = base + (d - (kPts - 1)) * spacing;
        ok[d] = std::abs(diff) < sp.a;
        pot[d] = ok[d] ? sp.pot(diff) : 0.0;
        phi[d] = (ok[d] && with_phi) ? sp.eval(diff) : 0.0;
      }
    }
  };

  // Interior-interior edges e = 1..T-1 between u(e) and u(e+1).
  std::vector<EdgeTable> mid(std::max(0, T - 1));
  for (int e = 1; e <= T - 1; ++e)
    mid[e - 1].fill(sp, offsets[e] - offsets[e - 1], spacing, s.matrix_mode);
  // Node terms for the convex merit.
  std::array<std::array<double, kPts>, 3> node{};
  if (!s.matrix_mode)
    for (int c = 0; c < T; ++c)
      for (int i = 0; i < kPts; ++i) {
        const double v = offsets[c] + i * spacing;
        node[c][i] = 0.5 * v * v - s.h[c] * v;
      }

  double m00 = 0, m01 = 0, m10 = 0, m11 = 0;
  if (s.matrix_mode) {
    m00 = (*s.M)(0, 0);
    m01 = (*s.M)(0, 1);
    m10 = (*s.M)(1, 0);
    m11 = (*s.M)(1, 1);
  }
  const bool strip_K = !s.affine_mode && !s.matrix_mode &&
                       s.K->kind() == ConvexSet::Kind::strip;
  double strip_sigma = 0.0;
  if (strip_K) {
    // Recover sigma from a probe: project (t, -t) and read the gap.
    VectorXd probe(2);
    probe << 1e6, -1e6;
    const VectorXd pr = s.K->project(probe);
    strip_sigma = pr[0] - pr[1];
  }

  // End-edge tables over the interior node index; rebuilt whenever the
  // boundary block changes. In direct mode the ends sit on the lattice, so
  // 81-entry tables cover all boundary combinations at once.
  std::array<double, kPts> e0_pot{}, e0_phi{}, eT_pot{}, eT_phi{};
  std::array<bool, kPts> e0_ok{}, eT_ok{};
  EdgeTable e0_lattice, eT_lattice;
  if (!s.affine_mode) {
    e0_lattice.fill(sp, offsets[0] - offsets[T], spacing, s.matrix_mode);
    eT_lattice.fill(sp, offsets[T + 1] - offsets[T - 1], spacing, s.matrix_mode);
  }
  auto fill_ends = [&](double u0, double uT1) {
    for (int i = 0; i < kPts; ++i) {
      const double d0 = offsets[0] + i * spacing - u0;
      e0_ok[i] = std::abs(d0) < a;
      e0_pot[i] = e0_ok[i] ? sp.pot(d0) : 0.0;
      e0_phi[i] = (e0_ok[i] && s.matrix_mode) ? sp.eval(d0) : 0.0;
      const double dT = uT1 - (offsets[T - 1] + i * spacing);
      eT_ok[i] = std::abs(dT) < a;
      eT_pot[i] = eT_ok[i] ? sp.pot(dT) : 0.0;
      eT_phi[i] = (eT_ok[i] && s.matrix_mode) ? sp.eval(dT) : 0.0;
    }
  };
  auto slice_ends = [&](int i0, int i1) {
    for (int i = 0; i < kPts; ++i) {
      const int d0 = i - i0 + (kPts - 1);
      e0_ok[i] = e0_lattice.ok[d0];
      e0_pot[i] = e0_lattice.pot[d0];
      e0_phi[i] = e0_lattice.phi[d0];
      const int dT = i1 - i + (kPts - 1);
      eT_ok[i] = dT >= 0 && dT < 2 * kPts - 1 && eT_lattice.ok[dT];
      eT_pot[i] = eT_ok[i] ? eT_lattice.pot[dT] : 0.0;
      eT_phi[i] = eT_ok[i] ? eT_lattice.phi[dT] : 0.0;
    }
  };

  std::array<int, 5> idx{};  // interior indices u(1)..u(T) (T <= 3 used)

  // Lower bound on everything still to come from level n (the potential and
  // squared-residual terms are nonnegative; only the node terms can dip).
  std::array<double, 5> slack{};
  if (!s.matrix_mode) {
    for (int n = T; n >= 1; --n) {
      double node_min = node[n - 1][0];
      for (int i = 1; i < kPts; ++i) node_min = std::min(node_min, node[n - 1][i]);
      slack[n - 1] = node_min + (n < T ? slack[n] : 0.0);
    }
  }

  // Scans the interior chain with the boundary block fixed; `base` carries
  // the hoisted boundary-only merit (G for subdifferential laws).
  const int window = std::min(kPts - 1, static_cast<int>(a / spacing) + 1);
  auto scan_interior = [&](double base) {
    const double bound_z0 = s.matrix_mode ? m00 * u[0] + m01 * u[T + 1] : 0.0;
    const double bound_z1 = s.matrix_mode ? m10 * u[0] + m11 * u[T + 1] : 0.0;
    auto rec = [&](auto&& self, int n, double acc) -> void {
      // entering with u(1..n-1) fixed; chooses u(n)
      if (n > T) {
        // close with edge T and the boundary terms
        const int iT = idx[T - 1];
        if (!eT_ok[iT]) return;
        double m = acc;
        if (s.matrix_mode) {
          const double phi_last = eT_phi[iT];
          const double phi_prev =
              T >= 2 ? mid[T - 2].phi[idx[T - 1] - idx[T - 2] + (kPts - 1)]
                     : e0_phi[idx[0]];
          const double rT = -(phi_last - phi_prev) + u[T] - s.h[T - 1];
          const double w1 = e0_phi[idx[0]] - bound_z0;
          const double w2 = -phi_last - bound_z1;
          m += rT * rT + w1 * w1 + w2 * w2;
        } else {
          m += eT_pot[iT];
        }
        if (std::isfinite(m) && (top.items.size() < 12 || m < top.items.back().first))
          top.offer(m, x);
        return;
      }
      if (top.items.size() >= 12 &&
          acc + (s.matrix_mode ? 0.0 : slack[n - 1]) >= top.items.back().first)
        return;
      int lo = 0, hi = kPts - 1;
      if (n >= 2) {
        lo = std::max(0, idx[n - 2] - window);
        hi = std::min(kPts - 1, idx[n - 2] + window);
      }
      for (int i = lo; i <= hi; ++i) {
        const double v = offsets[n - 1] + i * spacing;
        double step_term;
        if (n == 1) {
          if (!e0_ok[i]) continue;
          step_term = s.matrix_mode ? 0.0 : e0_pot[i] + node[0][i];
        } else {
          const int d = i - idx[n - 2] + (kPts - 1);
          if (!mid[n - 2].ok[d]) continue;
          if (s.matrix_mode) {
            const double phi_cur = mid[n - 2].phi[d];
            const double phi_prev =
                n == 2 ? e0_phi[idx[0]]
                       : mid[n - 3].phi[idx[n - 2] - idx[n - 3] + (kPts - 1)];
            const double r = -(phi_cur - phi_prev) + u[n - 1] - s.h[n - 2];
            step_term = r * r;
          } else {
            step_term = mid[n - 2].pot[d] + node[n - 1][i];
          }
        }
        idx[n - 1] = i;
        u[n] = v;
        x[n - 1] = v;
        self(self, n + 1, acc + step_term);
      }
    };
    rec(rec, 1, base);
  };

  if (s.affine_mode) {
    VectorXd wb(s.params), z(2);
    auto params_rec = [&](auto&& self, int p) -> void {
      if (p == s.params) {
        for (int i = 0; i < s.params; ++i) wb[i] = x[T + i];
        z = s.Koff + s.Kbasis * wb;
        u[0] = z[0];
        u[T + 1] = z[1];
        if (std::abs(u[0] - u[T + 1]) >= (T + 1) * a) return;  // no feasible chain
        fill_ends(u[0], u[T + 1]);
        scan_interior(s.G->value(z));
        return;
      }
      for (int i = 0; i < kPts; ++i) {
        x[T + p] = offsets[T + p] + i * spacing;
        self(self, p + 1);
      }
    };
    params_rec(params_rec, 0);
  } else {
    VectorXd z(2);
    for (int i0 = 0; i0 < kPts; ++i0) {
      u[0] = offsets[T] + i0 * spacing;
      x[T] = u[0];
      for (int i1 = 0; i1 < kPts; ++i1) {
        u[T + 1] = offsets[T + 1] + i1 * spacing;
        x[T + 1] = u[T + 1];
        // |u(0) - u(T+1)| < (T+1) a holds for every feasible chain.
        if (std::abs(u[0] - u[T + 1]) >= (T + 1) * a) continue;
        double base = 0.0;
        if (!s.matrix_mode) {
          if (strip_K) {
            if (std::abs(u[0] - u[T + 1]) > strip_sigma + 1e-9) continue;
          } else {
            z << u[0], u[T + 1];
            if (s.K->distance(z) > 1e-9) continue;
          }
          z << u[0], u[T + 1];
          base = s.G->value(z);
        }
        slice_ends(i0, i1);
        scan_interior(base);
      }
    }
  }
}

}  // namespace

GridFunction brute_force_solve(const PhiMap& phi, const BoundaryLaw& law,
                               const InteriorFunction& h) {
  if (h.dim() != 1 || h.horizon() > 3)
    throw std::invalid_argument("brute_force_solve: requires N = 1 and T <= 3");
  const int T = h.horizon();
  const double a = phi.radius();
  const ScalarPhi sp{phi, a};

  OracleSetup s;
  s.T = T;
  s.h = h.values.row(0);
  if (law.is_subdifferential()) {
    const auto& sd = law.subdiff();
    s.G = &sd.G;
    s.K = &sd.K;
    if (sd.K.is_affine_subspace()) {
      s.affine_mode = true;
      sd.K.affine_parameterization(s.Koff, s.Kbasis);
      s.params = static_cast<int>(s.Kbasis.cols());
    }
  } else {
    s.matrix_mode = true;
    s.M = &law.matrix_law().M;
  }

  // A-priori box: ||u||_T <= sqrt(T)|h|_inf plus the pointwise estimate
  // gives |u(m)| <= |h|_inf + T a; boundary parameters get the matching
  // pair range.
  const double R = s.h.cwiseAbs().maxCoeff() + T * a + 0.5;
  const int d = s.dims();
  const double W =
      s.affine_mode ? std::sqrt(2.0) * (R + s.Koff.norm()) + 0.5 : R;
  const double spacing = 2.0 * std::max(R, W) / 40.0;
  std::vector<double> offsets(d);
  for (int i = 0; i < d; ++i)
    offsets[i] = -((s.affine_mode && i >= T) ? W : R);

  TopList pass1;
  oracle_scan(s, sp, offsets, spacing, pass1);
  if (pass1.items.empty())
    throw ConvergenceError("brute_force_solve: no feasible cell in the scan box");

  // One refinement around the best cell; the coarse candidates seed the
  // retained list so the bound prunes immediately.
  TopList pass2;
  for (const auto& [m, cell] : pass1.items) pass2.offer(m, cell);
  {
    const auto& best = pass1.items.front().second;
    std::vector<double> off2(d);
    for (int i = 0; i < d; ++i) off2[i] = best[i] - spacing;
    oracle_scan(s, sp, off2, 2.0 * spacing / 40.0, pass2);
  }

  const TopList& top = pass2.items.empty() ? pass1 : pass2;  // pass2 always seeded
  for (const auto& [merit, cell] : top.items) {
    VectorXd x = Eigen::Map<const VectorXd>(cell.data(), d);
    if (newton_polish(s, sp, x)) {
      std::vector<double> u;
      unknowns_to_trace(s, x.data(), u);
      MatrixXd vals(1, T + 2);
      for (int n = 0; n <= T + 1; ++n) vals(0, n) = u[n];
      return GridFunction(vals);
    }
  }
  throw ConvergenceError(
      "brute_force_solve: Newton polish failed from every candidate cell "
      "(scan resolution too coarse)");
}

// ---------------------------------------------------------------------------
// Randomized estimate suite
// ---------------------------------------------------------------------------

namespace {

void run_estimate_instance(const PhiMap& phi, const BoundaryLaw& law, int T,
                           uint64_t instance_seed, EstimateSummary& sum) {
  const int N = law.half_dim();
  const double a = phi.radius();
  std::mt19937_64 rng(instance_seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  auto random_forcing = [&]() {
    MatrixXd v(N, T);
    for (int c = 0; c < T; ++c) {
      for (int r = 0; r < N; ++r) v(r, c) = unif(rng);
      const double nn = v.col(c).norm();
      if (nn > 1.0) v.col(c) /= nn;  // keep |h|_inf <= 1
    }
    return InteriorFunction(v);
  };

  SolveOptions opts;
  opts.tol_residual = 1e-11;

  const InteriorFunction h = random_forcing();
  const InteriorFunction l = random_forcing();
  const GridFunction uh = solve_q_general(phi, law, h, opts).solution;
  const GridFunction ul = solve_q_general(phi, law, l, opts).solution;

  const double dh = (h.values - l.values).colwise().norm().maxCoeff();
  const double lip =
      (uh.values - ul.values).middleCols(1, T).norm() - std::sqrt(T) * dh;
  const double zero =
      uh.values.middleCols(1, T).norm() - std::sqrt(T) * h.inf_norm();
  double pw = -std::numeric_limits<double>::infinity();
  for (const GridFunction* u : {&uh, &ul}) {
    double maxu = 0.0;
    for (int m = 0; m <= T + 1; ++m) maxu = std::max(maxu, u->at(m).norm());
    pw = std::max(pw, maxu - (u->values.middleCols(1, T).norm() / std::sqrt(T) +
                              T * a));
  }
  const BilinearTerms bt = bilinear_terms(phi, uh, ul);
  const double ident = std::abs(bt.O - bt.omega - bt.M);
  const double strip =
      (uh.values.col(0) - uh.values.col(T + 1)).norm() - (T + 1) * a;

  sum.instances += 1;
  sum.worst_lipschitz_margin = std::max(sum.worst_lipschitz_margin, lip);
  sum.worst_zero_margin = std::max(sum.worst_zero_margin, zero);
  sum.worst_pointwise_margin = std::max(sum.worst_pointwise_margin, pw);
  sum.worst_identity_error = std::max(sum.worst_identity_error, ident);
  sum.worst_strip_margin = std::max(sum.worst_strip_margin, strip);
  if (lip > 1e-10 || zero > 1e-10 || pw > 1e-10 || strip > 1e-10 ||
      ident > 1e-12 * (1.0 + std::abs(bt.O)))
    sum.violations += 1;
}

uint64_t instance_seed(uint64_t seed, int i) {
  return seed ^ (0x9e3779b97f4a7c15ULL * static_cast<uint64_t>(i + 1));
}

}  // namespace

EstimateSummary check_estimates(const PhiMap& phi, const BoundaryLaw& law, int T,
                                int batch, uint64_t seed, int workers) {
  workers = std::max(1, std::min(workers, batch == 0 ? 1 : batch));
  std::vector<EstimateSummary> partial(workers);
  if (workers == 1) {
    for (int i = 0; i < batch; ++i)
      run_estimate_instance(phi, law, T, instance_seed(seed, i), partial[0]);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w]() {
        for (int i = w; i < batch; i += workers)
          run_estimate_instance(phi, law, T, instance_seed(seed, i), partial[w]);
      });
    }
    for (auto& t : pool) t.join();
  }
  EstimateSummary sum;
  for (const auto& p : partial) {
    sum.instances += p.instances;
    sum.violations += p.violations;
    sum.worst_lipschitz_margin =
        std::max(sum.worst_lipschitz_margin, p.worst_lipschitz_margin);
    sum.worst_zero_margin = std::max(sum.worst_zero_margin, p.worst_zero_margin);
    sum.worst_pointwise_margin =
        std::max(sum.worst_pointwise_margin, p.worst_pointwise_margin);
    sum.worst_identity_error =
        std::max(sum.worst_identity_error, p.worst_identity_error);
    sum.worst_strip_margin = std::max(sum.worst_strip_margin, p.worst_strip_margin);
  }
  return sum;
}

}  // namespace philap
