#include <doctest.h>

#include <random>

#include "philap/solve.hpp"

using namespace philap;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd rotation2(double angle) {
  MatrixXd U(2, 2);
  U << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return U;
}

MatrixXd skew_block(int N) {
  MatrixXd M = MatrixXd::Zero(2 * N, 2 * N);
  M.topRightCorner(N, N) = MatrixXd::Identity(N, N);
  M.bottomLeftCorner(N, N) = -MatrixXd::Identity(N, N);
  return M;
}

std::vector<BoundaryLaw> full_catalog(int N) {
  std::vector<BoundaryLaw> laws;
  laws.push_back(make_dirichlet_law(N));
  laws.push_back(make_neumann_law(N));
  laws.push_back(make_mixed_law(N));
  laws.push_back(make_periodic_law(N));
  laws.push_back(make_antiperiodic_law(N));
  if (N == 2) laws.push_back(make_rotating_law(rotation2(0.9)));
  laws.push_back(make_matrix_law(MatrixXd::Identity(2 * N, 2 * N)));
  laws.push_back(make_matrix_law(skew_block(N)));
  laws.push_back(make_steklov_pair_law(N, 1.0, 2.0, 0.5, 2.0));
  return laws;
}

InteriorFunction random_forcing(int N, int T, double amp, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  MatrixXd v(N, T);
  for (int c = 0; c < T; ++c)
    for (int r = 0; r < N; ++r) v(r, c) = amp * unif(rng);
  return InteriorFunction(v);
}

// Random start compatible with the law: bounded oscillation, pair projected.
GridFunction random_start(const BoundaryLaw& law, int N, int T, double a,
                          std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  MatrixXd u(N, T + 2);
  for (int r = 0; r < N; ++r) u(r, 0) = 0.5 * unif(rng);
  for (int n = 1; n <= T + 1; ++n) {
    VectorXd d(N);
    for (int r = 0; r < N; ++r) d[r] = unif(rng);
    if (d.norm() > 0.0) d *= 0.3 * a * std::abs(unif(rng)) / d.norm();
    u.col(n) = u.col(n - 1) + d;
  }
  if (law.is_subdifferential()) {
    for (int k = 0; k < 10; ++k) {
      VectorXd z(2 * N);
      z << u.col(0), u.col(T + 1);
      const VectorXd zp = law.subdiff().K.project(z);
      u.col(0) = zp.head(N);
      u.col(T + 1) = zp.tail(N);
      if (sup_diff(GridFunction(u)) < 0.9 * a) break;
      const VectorXd mean = u.rowwise().mean();
      u = 0.5 * (u.colwise() - mean);
      u.colwise() += mean;
    }
  }
  return GridFunction(u);
}

}  // namespace

TEST_CASE("zero forcing gives the zero solution for every catalog law") {
  const PhiMap phi = PhiMap::relativistic();
  const int N = 2, T = 6;
  for (const auto& law : full_catalog(N)) {
    const auto rep = solve_q_general(phi, law, InteriorFunction::zero(N, T));
    CHECK(rep.converged);
    CHECK(rep.solution.norm_T2() <= 1e-9);
    CHECK(rep.interior_residual <= 1e-10);
    CHECK(rep.boundary_residual <= 1e-10);
    CHECK(rep.strip_ok);
    CHECK(rep.feasibility_margin > 0.0);
  }
}

TEST_CASE("periodic law with constant forcing returns the constant") {
  const PhiMap phi = PhiMap::relativistic();
  VectorXd c(2);
  c << 0.4, -0.7;
  const auto rep = solve_q_subdiff(phi, make_periodic_law(2),
                                   InteriorFunction::constant(c, 8));
  CHECK((rep.solution.values.colwise() - c).norm() <= 1e-8);
}

TEST_CASE("Dirichlet solver") {
  const PhiMap phi = PhiMap::relativistic();
  const int T = 5;
  std::mt19937_64 rng(101);

  SUBCASE("constant data and forcing give the constant") {
    VectorXd c(2);
    c << 0.25, 0.1;
    const auto rep =
        solve_dirichlet(phi, BoundaryPair(c, c), InteriorFunction::constant(c, T));
    CHECK((rep.solution.values.colwise() - c).norm() <= 1e-9);
  }

  SUBCASE("data outside the strip is rejected with the strip condition") {
    VectorXd x = VectorXd::Zero(1), y = VectorXd::Constant(1, (T + 1) * 1.0);
    CHECK_THROWS_WITH_AS(
        solve_dirichlet(phi, BoundaryPair(x, y), InteriorFunction::zero(1, T)),
        doctest::Contains("strip"), std::domain_error);
  }

  SUBCASE("agrees with solve_q_subdiff through a pinned-point law") {
    const InteriorFunction h = random_forcing(2, T, 0.8, rng);
    VectorXd x(2), y(2);
    x << 0.5, -0.3;
    y << -0.8, 0.2;
    const auto direct = solve_dirichlet(phi, BoundaryPair(x, y), h);
    VectorXd bc(4);
    bc << x, y;
    const BoundaryLaw pinned = BoundaryLaw::subdifferential(
        SmoothBoundaryFn::zero(), ConvexSet::point(bc));
    const auto via_law = solve_q_subdiff(phi, pinned, h);
    CHECK((direct.solution.values - via_law.solution.values).norm() <= 1e-10 * 100);
  }
}

TEST_CASE("Neumann solver satisfies the flux data and the mean identity") {
  const PhiMap phi = PhiMap::relativistic();
  const int N = 2, T = 7;
  std::mt19937_64 rng(103);

  SUBCASE("zero fluxes with constant forcing give the constant") {
    VectorXd c(N);
    c << -0.15, 0.45;
    const auto rep = solve_neumann(phi, BoundaryPair(VectorXd::Zero(N), VectorXd::Zero(N)),
                                   InteriorFunction::constant(c, T));
    CHECK((rep.solution.values.colwise() - c).norm() <= 1e-8);
  }

  SUBCASE("random instances: fluxes, mean identity, inverse recurrence") {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
      const InteriorFunction h = random_forcing(N, T, 1.0, rng);
      VectorXd x(N), y(N);
      for (int i = 0; i < N; ++i) {
        x[i] = 0.6 * unif(rng);
        y[i] = 0.6 * unif(rng);
      }
      const auto rep = solve_neumann(phi, BoundaryPair(x, y), h);
      const MatrixXd& u = rep.solution.values;
      const MatrixXd d = forward_differences(rep.solution);

      CHECK((phi.value(d.col(0)) - x).norm() <= 1e-9);
      CHECK((phi.value(d.col(T)) - y).norm() <= 1e-9);

      // sum_{k=1}^T u(k) = y - x + sum h(k)
      const VectorXd lhs = u.middleCols(1, T).rowwise().sum();
      const VectorXd rhs = y - x + h.values.rowwise().sum();
      CHECK((lhs - rhs).norm() <= 1e-9);

      // Delta u(k) = phi^{-1}(x + sum_{j<=k} (u(j) - h(j)))
      VectorXd acc = x;
      for (int k = 0; k <= T; ++k) {
        if (k >= 1) acc += u.col(k) - h.values.col(k - 1);
        CHECK((d.col(k) - phi.invert(acc)).norm() <= 1e-9);
      }
    }
  }
}

TEST_CASE("theta operator") {
  const PhiMap phi = PhiMap::relativistic();
  const int N = 2, T = 5;
  std::mt19937_64 rng(107);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const InteriorFunction h = random_forcing(N, T, 0.5, rng);

  SUBCASE("constant data with matching forcing maps to zero") {
    VectorXd c(N);
    c << 0.4, 0.4;
    const auto th = theta_eval(phi, InteriorFunction::constant(c, T),
                               BoundaryPair(c, c));
    CHECK(th.as_vector().norm() <= 1e-10);
  }

  SUBCASE("monotonicity on random pairs") {
    for (int trial = 0; trial < 20; ++trial) {
      VectorXd z1(2 * N), z2(2 * N);
      for (int i = 0; i < 2 * N; ++i) {
        z1[i] = 1.5 * unif(rng);
        z2[i] = 1.5 * unif(rng);
      }
      auto in_strip = [&](const VectorXd& z) {
        return (z.head(N) - z.tail(N)).norm() < (T + 1) * 0.95;
      };
      if (!in_strip(z1) || !in_strip(z2)) continue;
      const auto t1 = theta_eval(phi, h, BoundaryPair::from_vector(z1));
      const auto t2 = theta_eval(phi, h, BoundaryPair::from_vector(z2));
      CHECK((t1.as_vector() - t2.as_vector()).dot(z1 - z2) >= -1e-10);
    }
  }

  SUBCASE("coercivity trend along a ray inside the strip") {
    // Ray along (e, -e): stays inside the strip only while |x-y| < (T+1)a,
    // so scale along (e, e) + slight tilt instead and watch growth.
    VectorXd dir(2 * N);
    dir << 1.0, 0.5, 0.8, 0.3;  // generic, |x-y| grows slowly
    dir /= dir.norm();
    double prev = -1e300;
    bool grew = true;
    for (double s : {2.0, 8.0, 32.0, 128.0}) {
      const VectorXd z = s * dir;
      if ((z.head(N) - z.tail(N)).norm() >= (T + 1) * 1.0) break;
      const auto th = theta_eval(phi, h, BoundaryPair::from_vector(z));
      const double val = th.as_vector().dot(z) / z.norm();
      if (val <= prev) grew = false;
      prev = val;
    }
    CHECK(grew);
    CHECK(prev > 1.0);  // unbounded growth in practice
  }

  SUBCASE("data outside the strip propagates the Dirichlet error") {
    VectorXd x = VectorXd::Zero(N), y = VectorXd::Constant(N, 10.0);
    CHECK_THROWS_AS(theta_eval(phi, h, BoundaryPair(x, y)), std::domain_error);
  }
}

TEST_CASE("general solver handles matrix laws") {
  const PhiMap phi = PhiMap::relativistic();
  const int N = 2, T = 6;
  std::mt19937_64 rng(109);

  SUBCASE("zero matrix is the homogeneous Neumann law") {
    VectorXd c(N);
    c << 0.1, 0.3;
    const auto rep = solve_q_general(phi, make_matrix_law(MatrixXd::Zero(2 * N, 2 * N)),
                                     InteriorFunction::constant(c, T));
    CHECK((rep.solution.values.colwise() - c).norm() <= 1e-8);
    const auto neu = solve_neumann(phi, BoundaryPair(VectorXd::Zero(N), VectorXd::Zero(N)),
                                   InteriorFunction::constant(c, T));
    CHECK((rep.solution.values - neu.solution.values).norm() <= 1e-8);
  }

  SUBCASE("skew block law enforces phi(Du(0)) = u(T+1), phi(Du(T)) = u(0)") {
    const InteriorFunction h = random_forcing(N, T, 0.6, rng);
    const auto rep = solve_q_general(phi, make_matrix_law(skew_block(N)), h);
    REQUIRE(rep.converged);
    const MatrixXd d = forward_differences(rep.solution);
    CHECK((phi.value(d.col(0)) - rep.solution.values.col(T + 1)).norm() <= 1e-8);
    CHECK((phi.value(d.col(T)) - rep.solution.values.col(0)).norm() <= 1e-8);
  }
}

TEST_CASE("uniqueness: random starts land on the same solution") {
  const PhiMap phi = PhiMap::relativistic();
  const int N = 2, T = 6;
  std::mt19937_64 rng(113);
  const InteriorFunction h = random_forcing(N, T, 0.7, rng);
  for (const auto& law : {make_periodic_law(N), make_neumann_law(N),
                          make_matrix_law(skew_block(N))}) {
    GridFunction reference;
    for (int start = 0; start < 4; ++start) {
      SolveOptions opts;
      opts.seed = start;
      if (start > 0) opts.initial = random_start(law, N, T, 1.0, rng);
      const auto rep = solve_q_general(phi, law, h, opts);
      if (start == 0)
        reference = rep.solution;
      else
        CHECK((rep.solution.values - reference.values).norm() <= 1e-6);
    }
  }
}

TEST_CASE("solution operator obeys the sup-norm Lipschitz bound") {
  // ||u_h - u_l||_T <= sqrt(T) |h - l|_inf
  const PhiMap phi = PhiMap::relativistic();
  const int N = 2, T = 5;
  std::mt19937_64 rng(127);
  for (const auto& law : {make_periodic_law(N), make_mixed_law(N)}) {
    for (int trial = 0; trial < 10; ++trial) {
      const InteriorFunction h = random_forcing(N, T, 1.0, rng);
      const InteriorFunction l = random_forcing(N, T, 1.0, rng);
      const auto uh = solve_q_general(phi, law, h);
      const auto ul = solve_q_general(phi, law, l);
      const double lhs =
          (uh.solution.values - ul.solution.values).middleCols(1, T).norm();
      const double rhs =
          std::sqrt(T) * (h.values - l.values).colwise().norm().maxCoeff();
      CHECK(lhs <= rhs + 1e-9);
      CHECK(uh.strip_ok);
    }
  }
}

TEST_CASE("solution operator is continuous along a shrinking perturbation") {
  const PhiMap phi = PhiMap::relativistic();
  const int N = 1, T = 6;
  std::mt19937_64 rng(131);
  const InteriorFunction h = random_forcing(N, T, 0.8, rng);
  const InteriorFunction dir = random_forcing(N, T, 1.0, rng);
  const auto base = solve_q_general(phi, make_periodic_law(N), h);
  double prev = 1e300;
  for (double eps : {1e-1, 1e-3, 1e-5}) {
    InteriorFunction hp(h.values + eps * dir.values);
    const auto rep = solve_q_general(phi, make_periodic_law(N), hp);
    const double dist = (rep.solution.values - base.solution.values).norm();
    CHECK(dist < prev);
    CHECK(dist <= std::sqrt(T) * eps * dir.inf_norm() + 1e-9);
    prev = dist;
  }
}

TEST_CASE("energy certificate: the solution minimizes E over random probes") {
  const PhiMap phi = PhiMap::relativistic();
  const int N = 2, T = 5;
  std::mt19937_64 rng(137);
  const InteriorFunction h = random_forcing(N, T, 0.8, rng);
  const BoundaryLaw law = make_periodic_law(N);
  const auto rep = solve_q_subdiff(phi, law, h);
  REQUIRE(rep.energy.has_value());

  auto energy_of = [&](const GridFunction& v) {
    double val = 0.0;
    const MatrixXd d = forward_differences(v);
    for (int k = 0; k <= T; ++k) val += phi.potential(d.col(k));
    for (int n = 1; n <= T; ++n)
      val += 0.5 * v.at(n).squaredNorm() - h.at(n).dot(v.at(n));
    return val;
  };
  for (int probe = 0; probe < 30; ++probe) {
    const GridFunction v = random_start(law, N, T, 1.0, rng);
    if (sup_diff(v) >= 1.0) continue;
    CHECK(*rep.energy <= energy_of(v) + 1e-12);
  }
}

TEST_CASE("iteration limits surface as errors with diagnostics") {
  const PhiMap phi = PhiMap::relativistic();
  SolveOptions opts;
  opts.max_iters = 2;
  std::mt19937_64 rng(139);
  const InteriorFunction h = random_forcing(2, 6, 1.0, rng);
  CHECK_THROWS_AS(solve_q_subdiff(phi, make_periodic_law(2), h, opts),
                  MaxIterationsError);
}

TEST_CASE("laws whose domain misses the strip raise the infeasible error") {
  const PhiMap phi = PhiMap::relativistic();
  const int T = 3;
  // A pinned pair with |x - y| = 10 >> (T+1) a = 4 admits no feasible grid.
  VectorXd far(2);
  far << 5.0, -5.0;
  const BoundaryLaw law = BoundaryLaw::subdifferential(SmoothBoundaryFn::zero(),
                                                       ConvexSet::point(far));
  CHECK_THROWS_AS(solve_q_subdiff(phi, law, InteriorFunction::zero(1, T)),
                  InfeasibleLawError);
}
