#include <doctest.h>

#include <random>

#include "philap/verify.hpp"

using namespace philap;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

InteriorFunction random_forcing(int N, int T, double amp, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  MatrixXd v(N, T);
  for (int c = 0; c < T; ++c)
    for (int r = 0; r < N; ++r) v(r, c) = amp * unif(rng);
  return InteriorFunction(v);
}

MatrixXd skew_block(int N) {
  MatrixXd M = MatrixXd::Zero(2 * N, 2 * N);
  M.topRightCorner(N, N) = MatrixXd::Identity(N, N);
  M.bottomLeftCorner(N, N) = -MatrixXd::Identity(N, N);
  return M;
}

}  // namespace

TEST_CASE("residual report on an exact constant solution") {
  const PhiMap phi = PhiMap::relativistic();
  const int N = 2, T = 5;
  VectorXd c(N);
  c << 0.3, -0.2;
  const GridFunction u = GridFunction::constant(c, T);
  const auto rep = residual_report(phi, make_periodic_law(N),
                                   InteriorFunction::constant(c, T), u);
  CHECK(rep.interior_inf_norm == 0.0);
  CHECK(rep.boundary_residual <= 1e-14);
  CHECK(rep.feasibility_margin == doctest::Approx(1.0));
  CHECK(rep.strip_ok);
  for (const auto& e : rep.estimates) CHECK(e.ok);
  CHECK(rep.certified(1e-10));
}

TEST_CASE("residual grows monotone-ish under growing perturbations") {
  const PhiMap phi = PhiMap::relativistic();
  const int N = 1, T = 3;
  std::mt19937_64 rng(501);
  const InteriorFunction h = random_forcing(N, T, 0.5, rng);
  const auto base = brute_force_solve(phi, make_periodic_law(N),
                                      InteriorFunction(h.values.topRows(1)));
  MatrixXd dir(1, T + 2);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int i = 0; i <= T + 1; ++i) dir(0, i) = unif(rng);
  dir /= dir.norm();

  double prev = 0.0;
  for (double delta : {1e-6, 1e-4, 1e-2}) {
    GridFunction pert(MatrixXd(base.values + delta * dir));
    const auto rep = residual_report(phi, make_periodic_law(N), h, pert);
    CHECK(rep.interior_inf_norm >= prev);
    prev = rep.interior_inf_norm;
  }
  CHECK(prev > 1e-4);
}

TEST_CASE("infeasible candidates are flagged by the margin") {
  const PhiMap phi = PhiMap::relativistic();
  MatrixXd v = MatrixXd::Zero(1, 5);
  v(0, 2) = 1.7;  // a jump of 1.7 > a = 1
  const auto rep = residual_report(phi, make_neumann_law(1),
                                   InteriorFunction::zero(1, 3), GridFunction(v));
  CHECK(rep.feasibility_margin < 0.0);
  CHECK_FALSE(rep.certified(1e10));
}

TEST_CASE("brute force: constant forcing under the periodic law") {
  const PhiMap phi = PhiMap::relativistic();
  const GridFunction u = brute_force_solve(
      phi, make_periodic_law(1), InteriorFunction::constant(VectorXd::Constant(1, 0.37), 3));
  CHECK((u.values.array() - 0.37).abs().maxCoeff() <= 1e-9);
}

TEST_CASE("brute force requires N = 1 and T <= 3") {
  const PhiMap phi = PhiMap::relativistic();
  CHECK_THROWS_AS(
      brute_force_solve(phi, make_periodic_law(2), InteriorFunction::zero(2, 3)),
      std::invalid_argument);
  CHECK_THROWS_AS(
      brute_force_solve(phi, make_periodic_law(1), InteriorFunction::zero(1, 4)),
      std::invalid_argument);
}

TEST_CASE("oracle agreement across the law catalog at T = 2") {
  const PhiMap phi = PhiMap::relativistic();
  const int T = 2;
  std::mt19937_64 rng(503);
  std::vector<BoundaryLaw> laws;
  laws.push_back(make_dirichlet_law(1));
  laws.push_back(make_neumann_law(1));
  laws.push_back(make_periodic_law(1));
  laws.push_back(make_antiperiodic_law(1));
  laws.push_back(make_mixed_law(1));
  laws.push_back(make_matrix_law(MatrixXd::Identity(2, 2)));
  laws.push_back(make_matrix_law(skew_block(1)));
  SolveOptions opts;
  opts.tol_residual = 1e-11;
  for (const auto& law : laws) {
    for (int trial = 0; trial < 4; ++trial) {
      const InteriorFunction h = random_forcing(1, T, 1.0, rng);
      const GridFunction oracle = brute_force_solve(phi, law, h);
      const GridFunction solved = solve_q_general(phi, law, h, opts).solution;
      CHECK((oracle.values - solved.values).norm() <= 1e-6);
    }
  }
}

TEST_CASE("oracle self-consistency: polished output solves the system") {
  const PhiMap phi = PhiMap::relativistic();
  std::mt19937_64 rng(509);
  for (int trial = 0; trial < 5; ++trial) {
    const InteriorFunction h = random_forcing(1, 3, 1.0, rng);
    const auto law = make_antiperiodic_law(1);
    const GridFunction u = brute_force_solve(phi, law, h);
    const auto rep = residual_report(phi, law, h, u);
    CHECK(rep.interior_inf_norm <= 1e-9);
    CHECK(rep.boundary_residual <= 1e-9);
  }
}

TEST_CASE("estimate suite: zero violations on the periodic law") {
  const PhiMap phi = PhiMap::relativistic();
  const auto sum = check_estimates(phi, make_periodic_law(1), 6, 100, 12345);
  CHECK(sum.instances == 100);
  CHECK(sum.violations == 0);
  CHECK(sum.worst_lipschitz_margin <= 1e-10);
  CHECK(sum.worst_zero_margin <= 1e-10);
  CHECK(sum.worst_pointwise_margin <= 1e-10);
  CHECK(sum.worst_strip_margin <= 0.0);
}

TEST_CASE("estimate suite: zero violations on the mixed law") {
  const PhiMap phi = PhiMap::relativistic();
  const auto sum = check_estimates(phi, make_mixed_law(2), 5, 50, 999);
  CHECK(sum.instances == 50);
  CHECK(sum.violations == 0);
}

TEST_CASE("estimate suite is deterministic across worker counts") {
  const PhiMap phi = PhiMap::relativistic();
  const auto seq = check_estimates(phi, make_periodic_law(1), 5, 24, 77, 1);
  const auto par = check_estimates(phi, make_periodic_law(1), 5, 24, 77, 4);
  CHECK(seq.violations == par.violations);
  CHECK(seq.worst_lipschitz_margin == par.worst_lipschitz_margin);
  CHECK(seq.worst_zero_margin == par.worst_zero_margin);
  CHECK(seq.worst_identity_error == par.worst_identity_error);
}

TEST_CASE("degenerate pair h = l gives a zero Lipschitz bound that holds") {
  const PhiMap phi = PhiMap::relativistic();
  const int T = 4;
  std::mt19937_64 rng(521);
  const InteriorFunction h = random_forcing(1, T, 1.0, rng);
  SolveOptions opts;
  opts.tol_residual = 1e-12;
  const auto u1 = solve_q_general(phi, make_periodic_law(1), h, opts);
  const auto u2 = solve_q_general(phi, make_periodic_law(1), h, opts);
  CHECK((u1.solution.values - u2.solution.values)
            .middleCols(1, T)
            .norm() <= 1e-10);
}
