#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>

namespace philap::detail {

using Eigen::MatrixXd;

/// Spectral projected gradient: Barzilai-Borwein steps, nonmonotone Armijo
/// backtracking, projection of the nonsmooth part, and an optional cap on
/// the step so iterates stay strictly inside the phi domain. `value` must
/// return +inf outside the feasible region; `stop` is evaluated on every
/// accepted iterate and decides convergence (residual checks live there).
struct SpgProblem {
  std::function<double(const MatrixXd&)> value;
  std::function<MatrixXd(const MatrixXd&)> gradient;
  std::function<MatrixXd(const MatrixXd&)> project;
  std::function<double(const MatrixXd&, const MatrixXd&)> max_step;  // optional
  std::function<bool(const MatrixXd&, int)> stop;
};

struct SpgOptions {
  int max_iters = 100000;
  double step_safety = 0.99;
  int memory = 10;
  double initial_step = 1.0;
};

struct SpgOutcome {
  MatrixXd x;
  int iterations = 0;
  bool converged = false;
  bool stagnated = false;
};

inline double frob_dot(const MatrixXd& a, const MatrixXd& b) {
  return a.cwiseProduct(b).sum();
}

inline SpgOutcome spg_minimize(const SpgProblem& prob, MatrixXd x0,
                               const SpgOptions& opts) {
  SpgOutcome out;
  MatrixXd x = prob.project ? prob.project(x0) : std::move(x0);
  double f = prob.value(x);
  MatrixXd g = prob.gradient(x);
  std::deque<double> hist{f};
  double step = opts.initial_step;

  for (int it = 0; it <= opts.max_iters; ++it) {
    out.iterations = it;
    if (prob.stop && prob.stop(x, it)) {
      out.converged = true;
      break;
    }
    if (it == opts.max_iters) break;

    double tcap = std::numeric_limits<double>::infinity();
    if (prob.max_step) tcap = opts.step_safety * prob.max_step(x, g);
    double t = std::clamp(step, 1e-14, std::min(1e14, tcap));
    const double fref = *std::max_element(hist.begin(), hist.end());

    MatrixXd cand;
    double fc = 0.0;
    bool accepted = false;
    for (int back = 0; back < 80; ++back) {
      cand = x - t * g;
      if (prob.project) cand = prob.project(cand);
      const MatrixXd d = cand - x;
      const double dn2 = d.squaredNorm();
      if (dn2 == 0.0) break;
      fc = prob.value(cand);
      // The slack keeps BB steps moving once true decreases fall below the
      // rounding floor of the objective.
      if (std::isfinite(fc) &&
          fc <= fref + 1e-4 * frob_dot(g, d) + 1e-14 * (1.0 + std::abs(fref))) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      out.stagnated = true;
      break;
    }

    const MatrixXd gc = prob.gradient(cand);
    const MatrixXd s = cand - x;
    const MatrixXd y = gc - g;
    const double sy = frob_dot(s, y);
    step = sy > 0.0 ? s.squaredNorm() / sy : std::min(t * 4.0, 1e14);
    x = std::move(cand);
    f = fc;
    g = gc;
    hist.push_back(f);
    if (static_cast<int>(hist.size()) > opts.memory) hist.pop_front();
  }
  out.x = std::move(x);
  return out;
}

}  // namespace philap::detail
