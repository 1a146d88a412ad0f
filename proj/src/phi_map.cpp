#include "philap/phi_map.hpp"

#include <cmath>
#include <limits>

namespace philap {

namespace {

// Base (a = 1) radial pieces of the p-relativistic map:
//   g(s) = s^{p-1} (1 - s^p)^{1/p - 1},   Phi(s) = 1 - (1 - s^p)^{1/p}.
double prel_g(double p, double s) {
  if (s <= 0.0) return 0.0;
  const double t = std::pow(s, p);
  return std::pow(s, p - 1.0) * std::pow(1.0 - t, 1.0 / p - 1.0);
}

double prel_g_prime(double p, double s) {
  if (s <= 0.0) {
    if (p == 2.0) return 1.0;
    return p > 2.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  const double t = std::pow(s, p);
  return prel_g(p, s) * (p - 1.0) * (1.0 / s + std::pow(s, p - 1.0) / (1.0 - t));
}

double prel_potential(double p, double s) {
  const double t = std::pow(std::min(s, 1.0), p);
  return 1.0 - std::pow(std::max(0.0, 1.0 - t), 1.0 / p);
}

// Adaptive Simpson quadrature for custom profiles without an antiderivative.
double simpson(const std::function<double(double)>& f, double lo, double hi,
               double flo, double fmid, double fhi, double whole, double tol,
               int depth) {
  const double mid = 0.5 * (lo + hi);
  const double lmid = 0.5 * (lo + mid), rmid = 0.5 * (mid + hi);
  const double flm = f(lmid), frm = f(rmid);
  const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
  const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson(f, lo, mid, flo, flm, fmid, left, tol / 2.0, depth - 1) +
         simpson(f, mid, hi, fmid, frm, fhi, right, tol / 2.0, depth - 1);
}

double integrate(const std::function<double(double)>& f, double lo, double hi,
                 double tol) {
  if (hi <= lo) return 0.0;
  const double mid = 0.5 * (lo + hi);
  const double flo = f(lo), fmid = f(mid), fhi = f(hi);
  const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
  return simpson(f, lo, hi, flo, fmid, fhi, whole, tol, 48);
}

}  // namespace

PhiMap::PhiMap(Kind kind, double a, double p, double q, RadialProfile profile)
    : kind_(kind), a_(a), p_(p), q_(q), profile_(std::move(profile)) {
  if (a_ <= 0.0) throw std::invalid_argument("PhiMap: radius must be positive");
}

PhiMap PhiMap::relativistic(double a) { return p_relativistic(2.0, a); }

PhiMap PhiMap::p_relativistic(double p, double a) {
  if (p <= 1.0) throw std::invalid_argument("PhiMap: need p > 1");
  return PhiMap(p == 2.0 ? Kind::relativistic : Kind::p_relativistic, a, p, 0.0, {});
}

PhiMap PhiMap::double_phase(double p, double q, double a) {
  if (p <= 1.0 || q <= 1.0 || p == q)
    throw std::invalid_argument("PhiMap: double phase needs p, q > 1 and p != q");
  return PhiMap(Kind::double_phase, a, p, q, {});
}

PhiMap PhiMap::custom_radial(double a, RadialProfile profile) {
  if (!profile.g) throw std::invalid_argument("PhiMap: custom profile missing g");
  if (std::abs(profile.g(0.0)) > 1e-12)
    throw std::invalid_argument("PhiMap: custom profile must have g(0) = 0");
  // Spot check of strict monotonicity on a coarse sample.
  double prev = profile.g(0.0);
  for (int k = 1; k <= 8; ++k) {
    const double s = a * (k / 9.0);
    const double val = profile.g(s);
    if (!(val > prev))
      throw std::invalid_argument("PhiMap: custom profile must be strictly increasing");
    prev = val;
  }
  return PhiMap(Kind::custom_radial, a, 0.0, 0.0, std::move(profile));
}

double PhiMap::profile(double s) const {
  switch (kind_) {
    case Kind::relativistic:
    case Kind::p_relativistic:
      return prel_g(p_, s / a_);
    case Kind::double_phase:
      return prel_g(p_, s / a_) + prel_g(q_, s / a_);
    case Kind::custom_radial:
      return profile_.g(s);
  }
  return 0.0;
}

double PhiMap::profile_derivative(double s) const {
  switch (kind_) {
    case Kind::relativistic:
    case Kind::p_relativistic:
      return prel_g_prime(p_, s / a_) / a_;
    case Kind::double_phase:
      return (prel_g_prime(p_, s / a_) + prel_g_prime(q_, s / a_)) / a_;
    case Kind::custom_radial: {
      if (profile_.derivative) return profile_.derivative(s);
      const double eps = 1e-7 * a_;
      const double lo = std::max(0.0, s - eps);
      const double hi = std::min(a_ * (1.0 - 1e-12), s + eps);
      return (profile_.g(hi) - profile_.g(lo)) / (hi - lo);
    }
  }
  return 0.0;
}

double PhiMap::potential_radial(double s) const {
  switch (kind_) {
    case Kind::relativistic:
    case Kind::p_relativistic:
      return a_ * prel_potential(p_, s / a_);
    case Kind::double_phase:
      return a_ * (prel_potential(p_, s / a_) + prel_potential(q_, s / a_));
    case Kind::custom_radial: {
      const double cap = std::min(s, a_ * (1.0 - 1e-15));
      if (profile_.antiderivative)
        return profile_.antiderivative(cap) - profile_.antiderivative(0.0);
      return integrate(profile_.g, 0.0, cap, 1e-10);
    }
  }
  return 0.0;
}

double PhiMap::profile_inverse(double r) const {
  if (r <= 0.0) return 0.0;
  if (kind_ == Kind::relativistic)
    return a_ * r / std::sqrt(1.0 + r * r);

  // g is strictly increasing on [0, a), so a bracketing Newton/bisection
  // hybrid is globally safe.
  double lo = 0.0, hi = a_ * (1.0 - 1e-15);
  if (profile(hi) < r) return hi;
  double s = std::min(hi, a_ * r / std::sqrt(1.0 + r * r));  // decent seed
  const double tol = 1e-15 * (1.0 + r);
  for (int it = 0; it < 200; ++it) {
    const double f = profile(s) - r;
    if (std::abs(f) <= tol) return s;
    (f > 0.0 ? hi : lo) = s;
    double next = s;
    const double d = profile_derivative(s);
    if (std::isfinite(d) && d > 0.0) next = s - f / d;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == s) next = 0.5 * (lo + hi);
    s = next;
    if (hi - lo <= 1e-17 * a_) break;
  }
  if (std::abs(profile(s) - r) <= 1e-9 * (1.0 + r)) return s;
  throw ConvergenceError("PhiMap: radial inverse failed to converge (ill-formed profile?)");
}

VectorXd PhiMap::value(const VectorXd& y) const {
  const double s = y.norm();
  if (s >= a_) throw std::domain_error("phi_eval: |y| must be < radius");
  if (s == 0.0) return VectorXd::Zero(y.size());
  return (profile(s) / s) * y;
}

VectorXd PhiMap::invert(const VectorXd& z) const {
  const double r = z.norm();
  if (r == 0.0) return VectorXd::Zero(z.size());
  const double s = profile_inverse(r);
  return (s / r) * z;
}

double PhiMap::potential(const VectorXd& y) const {
  const double s = y.norm();
  if (s > a_) throw std::domain_error("phi_potential: |y| must be <= radius");
  return potential_radial(s);
}

}  // namespace philap
