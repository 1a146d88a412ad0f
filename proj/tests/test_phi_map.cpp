#include <doctest.h>

#include <cmath>
#include <random>

#include "philap/phi_map.hpp"

using namespace philap;
using Eigen::VectorXd;

namespace {

VectorXd ball_sample(int N, double r, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  VectorXd y(N);
  for (int i = 0; i < N; ++i) y[i] = unif(rng);
  const double nn = y.norm();
  if (nn > 0.0) y *= r * std::abs(unif(rng)) / nn;
  return y;
}

VectorXd scalar(double v) {
  VectorXd y(1);
  y[0] = v;
  return y;
}

}  // namespace

TEST_CASE("relativistic values: 0 and the 0.6 -> 0.75 point") {
  const PhiMap phi = PhiMap::relativistic();
  CHECK(phi.value(scalar(0.0)).norm() == 0.0);
  CHECK(phi.value(scalar(0.6))[0] == doctest::Approx(0.75).epsilon(1e-14));
  CHECK_THROWS_AS(phi.value(scalar(1.0)), std::domain_error);
}

TEST_CASE("relativistic inverse: closed form and round trips") {
  const PhiMap phi = PhiMap::relativistic();
  CHECK(phi.invert(scalar(0.75))[0] == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(phi.invert(scalar(0.0)).norm() == 0.0);
}

TEST_CASE("round trip phi^-1(phi(y)) = y on the catalog") {
  std::mt19937_64 rng(23);
  const PhiMap phis[] = {PhiMap::relativistic(), PhiMap::p_relativistic(3.0),
                         PhiMap::p_relativistic(1.5), PhiMap::double_phase(2.0, 3.0),
                         PhiMap::relativistic(2.5)};
  for (int trial = 0; trial < 1000; ++trial) {
    const PhiMap& phi = phis[trial % 5];
    const int N = 1 + static_cast<int>(rng() % 4);
    const VectorXd y = ball_sample(N, 0.99 * phi.radius(), rng);
    const VectorXd back = phi.invert(phi.value(y));
    CHECK((back - y).norm() <= 1e-12 * (1.0 + y.norm()));
  }
}

TEST_CASE("oddness phi(-y) = -phi(y)") {
  std::mt19937_64 rng(29);
  const PhiMap phi = PhiMap::p_relativistic(3.0);
  CHECK(phi.value(scalar(0.0)).norm() == 0.0);
  for (int trial = 0; trial < 100; ++trial) {
    const VectorXd y = ball_sample(3, 0.95, rng);
    CHECK((phi.value(-y) + phi.value(y)).norm() <= 1e-14);
  }
}

TEST_CASE("potential values") {
  // p = 2: Phi(0.6) = 1 - sqrt(1 - 0.36) = 0.2
  const PhiMap phi2 = PhiMap::p_relativistic(2.0);
  CHECK(phi2.potential(scalar(0.6)) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(phi2.potential(scalar(0.0)) == 0.0);
  CHECK(phi2.potential(scalar(1.0)) == doctest::Approx(1.0));  // closed-ball value
  CHECK_THROWS_AS(phi2.potential(scalar(1.0 + 1e-9)), std::domain_error);
}

TEST_CASE("potential gradient matches phi by central differences") {
  std::mt19937_64 rng(31);
  const PhiMap phis[] = {PhiMap::relativistic(), PhiMap::p_relativistic(3.0),
                         PhiMap::double_phase(2.0, 4.0)};
  for (int trial = 0; trial < 200; ++trial) {
    const PhiMap& phi = phis[trial % 3];
    const int N = 1 + static_cast<int>(rng() % 3);
    const VectorXd y = ball_sample(N, 0.9, rng);
    const VectorXd g = phi.value(y);
    const double eps = 1e-6;
    for (int i = 0; i < N; ++i) {
      VectorXd yp = y, ym = y;
      yp[i] += eps;
      ym[i] -= eps;
      if (yp.norm() >= 1.0 || ym.norm() >= 1.0) continue;
      const double fd = (phi.potential(yp) - phi.potential(ym)) / (2.0 * eps);
      CHECK(std::abs(fd - g[i]) <= 1e-6 * (1.0 + std::abs(g[i])));
    }
  }
}

TEST_CASE("potential is midpoint convex on the closed ball") {
  std::mt19937_64 rng(37);
  const PhiMap phis[] = {PhiMap::relativistic(), PhiMap::p_relativistic(2.5),
                         PhiMap::double_phase(2.0, 3.0)};
  for (int trial = 0; trial < 300; ++trial) {
    const PhiMap& phi = phis[trial % 3];
    const VectorXd y1 = ball_sample(2, 1.0, rng);
    const VectorXd y2 = ball_sample(2, 1.0, rng);
    const double mid = phi.potential(0.5 * (y1 + y2));
    CHECK(mid <= 0.5 * (phi.potential(y1) + phi.potential(y2)) + 1e-12);
  }
}

TEST_CASE("strict monotonicity of phi on random pairs") {
  std::mt19937_64 rng(41);
  const PhiMap phis[] = {PhiMap::relativistic(), PhiMap::p_relativistic(3.0),
                         PhiMap::double_phase(2.0, 4.0)};
  for (int trial = 0; trial < 300; ++trial) {
    const PhiMap& phi = phis[trial % 3];
    const VectorXd y1 = ball_sample(3, 0.97, rng);
    const VectorXd y2 = ball_sample(3, 0.97, rng);
    if ((y1 - y2).norm() < 1e-12) continue;
    CHECK((phi.value(y1) - phi.value(y2)).dot(y1 - y2) > 0.0);
  }
}

TEST_CASE("profile blows up toward the ball radius") {
  const PhiMap phis[] = {PhiMap::relativistic(), PhiMap::p_relativistic(3.0),
                         PhiMap::double_phase(2.0, 4.0)};
  for (const auto& phi : phis) {
    double prev = 0.0;
    for (int k = 1; k <= 8; ++k) {
      const double s = phi.radius() * (1.0 - std::pow(10.0, -k));
      const double g = phi.profile(s);
      CHECK(g > prev);
      prev = g;
    }
    CHECK(prev > 1e3);  // unbounded growth in practice
  }
}

TEST_CASE("double phase decomposes into the two power maps") {
  const PhiMap dp = PhiMap::double_phase(2.0, 4.0);
  const PhiMap p2 = PhiMap::p_relativistic(2.0);
  const PhiMap p4 = PhiMap::p_relativistic(4.0);
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 100; ++trial) {
    const VectorXd y = ball_sample(2, 0.95, rng);
    CHECK((dp.value(y) - p2.value(y) - p4.value(y)).norm() <= 1e-12);
    CHECK(dp.potential(y) ==
          doctest::Approx(p2.potential(y) + p4.potential(y)).epsilon(1e-12));
  }
}

TEST_CASE("custom radial profile with quadrature potential") {
  // g(s) = s / (1 - s) has the primitive -s - log(1 - s).
  RadialProfile prof;
  prof.g = [](double s) { return s / (1.0 - s); };
  const PhiMap quad = PhiMap::custom_radial(1.0, prof);
  RadialProfile with_anti = prof;
  with_anti.antiderivative = [](double s) { return -s - std::log1p(-s); };
  const PhiMap exact = PhiMap::custom_radial(1.0, with_anti);

  for (double s : {0.1, 0.3, 0.55, 0.8, 0.95}) {
    const double reference = -s - std::log1p(-s);
    CHECK(quad.potential_radial(s) == doctest::Approx(reference).epsilon(1e-9));
    CHECK(exact.potential_radial(s) == doctest::Approx(reference).epsilon(1e-14));
  }
  // Round trips exercise the bracketing Newton inverse on the profile.
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 200; ++trial) {
    const VectorXd y = ball_sample(2, 0.99, rng);
    CHECK((quad.invert(quad.value(y)) - y).norm() <= 1e-12 * (1.0 + y.norm()));
  }
}

TEST_CASE("ill-formed custom profiles are rejected") {
  RadialProfile bad;
  bad.g = [](double s) { return 1.0 + s; };  // g(0) != 0
  CHECK_THROWS_AS(PhiMap::custom_radial(1.0, bad), std::invalid_argument);
  RadialProfile dec;
  dec.g = [](double s) { return -s; };  // decreasing
  CHECK_THROWS_AS(PhiMap::custom_radial(1.0, dec), std::invalid_argument);
}
