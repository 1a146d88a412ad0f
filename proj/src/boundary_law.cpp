#include "philap/boundary_law.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

#include "philap/phi_map.hpp"  // ConvergenceError

namespace philap {

namespace {
constexpr double kNormTol = 1e-12;
constexpr double kPsdTol = -1e-12;

// |x|^p / p with gradient |x|^{p-2} x; convex for p > 1.
double power_value(double coeff, double p, const VectorXd& x) {
  const double r = x.norm();
  return r == 0.0 ? 0.0 : coeff * std::pow(r, p) / p;
}
VectorXd power_gradient(double coeff, double p, const VectorXd& x) {
  const double r = x.norm();
  if (r == 0.0) return VectorXd::Zero(x.size());
  return coeff * std::pow(r, p - 2.0) * x;
}
}  // namespace

SmoothBoundaryFn SmoothBoundaryFn::zero() { return {}; }

SmoothBoundaryFn SmoothBoundaryFn::affine(VectorXd c) {
  SmoothBoundaryFn f;
  f.form = Form::affine;
  f.affine_coeff = std::move(c);
  return f;
}

SmoothBoundaryFn SmoothBoundaryFn::quadratic(MatrixXd A) {
  SmoothBoundaryFn f;
  f.form = Form::quadratic;
  f.quad = 0.5 * (A + A.transpose());
  return f;
}

SmoothBoundaryFn SmoothBoundaryFn::generic(
    std::function<double(const VectorXd&)> value,
    std::function<VectorXd(const VectorXd&)> gradient) {
  SmoothBoundaryFn f;
  f.form = Form::generic;
  f.value_fn = std::move(value);
  f.gradient_fn = std::move(gradient);
  return f;
}

double SmoothBoundaryFn::value(const VectorXd& v) const {
  switch (form) {
    case Form::zero:
      return 0.0;
    case Form::affine:
      return affine_coeff.dot(v);
    case Form::quadratic:
      return 0.5 * v.dot(quad * v);
    case Form::generic:
      return value_fn(v);
  }
  return 0.0;
}

VectorXd SmoothBoundaryFn::gradient(const VectorXd& v) const {
  switch (form) {
    case Form::zero:
      return VectorXd::Zero(v.size());
    case Form::affine:
      return affine_coeff;
    case Form::quadratic:
      return quad * v;
    case Form::generic:
      return gradient_fn(v);
  }
  return VectorXd::Zero(v.size());
}

BoundaryLaw BoundaryLaw::subdifferential(SmoothBoundaryFn G, ConvexSet K) {
  const int dim = K.ambient_dim();
  return BoundaryLaw(SubdifferentialLaw{std::move(G), std::move(K)}, dim);
}

BoundaryLaw BoundaryLaw::matrix(MatrixXd M) {
  const int dim = static_cast<int>(M.rows());
  return BoundaryLaw(MatrixLaw{std::move(M)}, dim);
}

BoundaryLaw make_dirichlet_law(int n) {
  return BoundaryLaw::subdifferential(SmoothBoundaryFn::zero(),
                                      ConvexSet::point(VectorXd::Zero(2 * n)));
}

BoundaryLaw make_neumann_law(int n) {
  return BoundaryLaw::subdifferential(SmoothBoundaryFn::zero(),
                                      ConvexSet::full_space(2 * n));
}

BoundaryLaw make_mixed_law(int n) {
  return BoundaryLaw::subdifferential(
      SmoothBoundaryFn::zero(),
      ConvexSet::product(ConvexSet::point(VectorXd::Zero(n)),
                         ConvexSet::full_space(n)));
}

BoundaryLaw make_periodic_law(int n) {
  return BoundaryLaw::subdifferential(
      SmoothBoundaryFn::zero(),
      ConvexSet::graph_of_orthogonal(MatrixXd::Identity(n, n)));
}

BoundaryLaw make_antiperiodic_law(int n) {
  return BoundaryLaw::subdifferential(
      SmoothBoundaryFn::zero(),
      ConvexSet::graph_of_orthogonal(-MatrixXd::Identity(n, n)));
}

BoundaryLaw make_rotating_law(const MatrixXd& U) {
  return BoundaryLaw::subdifferential(SmoothBoundaryFn::zero(),
                                      ConvexSet::graph_of_orthogonal(U));
}

BoundaryLaw make_matrix_law(const MatrixXd& M) {
  if (M.rows() != M.cols() || M.rows() % 2 != 0)
    throw std::invalid_argument("make_matrix_law: M must be square 2N x 2N");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (M + M.transpose()));
  if (es.eigenvalues().minCoeff() < kPsdTol)
    throw std::invalid_argument(
        "make_matrix_law: quadratic form of M must be positive semidefinite");
  return BoundaryLaw::matrix(M);
}

BoundaryLaw make_steklov_pair_law(int n, double coeff_left, double power_left,
                                  double coeff_right, double power_right) {
  if (power_left <= 1.0 || power_right <= 1.0 || coeff_left < 0.0 || coeff_right < 0.0)
    throw std::invalid_argument("make_steklov_pair_law: need powers > 1, coeffs >= 0");
  auto value = [=](const VectorXd& z) {
    const int half = static_cast<int>(z.size()) / 2;
    return power_value(coeff_left, power_left, z.head(half)) +
           power_value(coeff_right, power_right, z.tail(half));
  };
  auto grad = [=](const VectorXd& z) {
    const int half = static_cast<int>(z.size()) / 2;
    VectorXd g(z.size());
    g.head(half) = power_gradient(coeff_left, power_left, z.head(half));
    g.tail(half) = power_gradient(coeff_right, power_right, z.tail(half));
    return g;
  };
  return BoundaryLaw::subdifferential(SmoothBoundaryFn::generic(value, grad),
                                      ConvexSet::full_space(2 * n));
}

BoundaryLaw make_steklov_difference_law(int n, double power, double sigma) {
  if (power <= 1.0)
    throw std::invalid_argument("make_steklov_difference_law: need power > 1");
  if (power == 2.0) {
    // g(x) = |x|^2/2 gives the quadratic G(x,y) = |x-y|^2/2.
    MatrixXd A(2 * n, 2 * n);
    const MatrixXd id = MatrixXd::Identity(n, n);
    A.topLeftCorner(n, n) = id;
    A.topRightCorner(n, n) = -id;
    A.bottomLeftCorner(n, n) = -id;
    A.bottomRightCorner(n, n) = id;
    return BoundaryLaw::subdifferential(SmoothBoundaryFn::quadratic(A),
                                        ConvexSet::strip(n, sigma));
  }
  auto value = [=](const VectorXd& z) {
    const int half = static_cast<int>(z.size()) / 2;
    return power_value(1.0, power, VectorXd(z.head(half) - z.tail(half)));
  };
  auto grad = [=](const VectorXd& z) {
    const int half = static_cast<int>(z.size()) / 2;
    const VectorXd g = power_gradient(1.0, power, VectorXd(z.head(half) - z.tail(half)));
    VectorXd out(z.size());
    out.head(half) = g;
    out.tail(half) = -g;
    return out;
  };
  return BoundaryLaw::subdifferential(SmoothBoundaryFn::generic(value, grad),
                                      ConvexSet::strip(n, sigma));
}

BoundaryLaw make_custom_law(SmoothBoundaryFn G, ConvexSet K) {
  const int dim = K.ambient_dim();
  const VectorXd zero = VectorXd::Zero(dim);
  if (std::abs(G.value(zero)) > kNormTol)
    throw std::invalid_argument("make_custom_law: G(0) must vanish");
  if (G.gradient(zero).norm() > kNormTol)
    throw std::invalid_argument("make_custom_law: grad G(0) must vanish");
  if (!K.contains(zero, kNormTol))
    throw std::invalid_argument("make_custom_law: K must contain the origin");
  return BoundaryLaw::subdifferential(std::move(G), std::move(K));
}

BoundaryLaw make_law(int n, const LawDescriptor& d) {
  if (d.kind == "dirichlet") return make_dirichlet_law(n);
  if (d.kind == "neumann") return make_neumann_law(n);
  if (d.kind == "mixed") return make_mixed_law(n);
  if (d.kind == "periodic") return make_periodic_law(n);
  if (d.kind == "antiperiodic") return make_antiperiodic_law(n);
  if (d.kind == "rotating") {
    if (d.matrix.rows() != n || d.matrix.cols() != n)
      throw std::invalid_argument("make_law: rotating needs an N x N matrix");
    return make_rotating_law(d.matrix);
  }
  if (d.kind == "matrix") {
    if (d.matrix.rows() != 2 * n || d.matrix.cols() != 2 * n)
      throw std::invalid_argument("make_law: matrix law needs a 2N x 2N matrix");
    return make_matrix_law(d.matrix);
  }
  if (d.kind == "steklov_pair")
    return make_steklov_pair_law(n, d.coeff_left, d.power_left, d.coeff_right,
                                 d.power_right);
  if (d.kind == "steklov_difference")
    return make_steklov_difference_law(n, d.power, d.sigma);
  throw std::invalid_argument("make_law: unknown law kind '" + d.kind + "'");
}

VectorXd prox_boundary(const BoundaryLaw& law, const VectorXd& z, double t) {
  if (!law.is_subdifferential())
    throw std::invalid_argument("prox_boundary: needs a subdifferential law");
  if (!(t > 0.0)) throw std::invalid_argument("prox_boundary: needs t > 0");
  const auto& sd = law.subdiff();
  const auto& K = sd.K;

  switch (sd.G.form) {
    case SmoothBoundaryFn::Form::zero:
      return K.project(z);
    case SmoothBoundaryFn::Form::affine:
      return K.project(z - t * sd.G.affine_coeff);
    case SmoothBoundaryFn::Form::quadratic:
      if (K.is_affine_subspace()) {
        // v = z_K + B w minimizing v'Av/2 + |v - z|^2/(2t).
        VectorXd off;
        MatrixXd B;
        K.affine_parameterization(off, B);
        if (B.cols() == 0) return off;
        const MatrixXd H = B.transpose() * sd.G.quad * B +
                           MatrixXd::Identity(B.cols(), B.cols()) / t;
        const VectorXd rhs = B.transpose() * ((z - off) / t - sd.G.quad * off);
        return off + B * H.ldlt().solve(rhs);
      }
      break;
    case SmoothBoundaryFn::Form::generic:
      break;
  }

  // Projected-gradient inner loop on psi(v) = G(v) + |v - z|^2 / (2t) with
  // a running Lipschitz estimate for grad G; psi is 1/t-strongly convex, so
  // the fixed step 1/(1.1 L + 1/t) contracts without a line search.
  VectorXd v = K.project(z);
  VectorXd vprev = v;
  VectorXd gprev = sd.G.gradient(v);
  double L = 1e-12;
  const double tol = 1e-12 * (1.0 + z.norm());
  double best_res = std::numeric_limits<double>::infinity();
  VectorXd best_v = v;
  for (int it = 0; it < 50000; ++it) {
    const VectorXd gv = sd.G.gradient(v);
    if (it > 0) {
      const double dv = (v - vprev).norm();
      if (dv > 0.0) L = std::max(L, (gv - gprev).norm() / dv);
    }
    const VectorXd r = (z - v) / t - gv;
    const double res =
        K.distance(v) + (r - K.project_normal_cone(v, r)).norm();
    if (res <= tol) return v;
    if (res < best_res) {
      best_res = res;
      best_v = v;
    } else if (res > 10.0 * best_res && it > 10) {
      // Overshoot from an underestimated L: restart from the best point.
      L *= 4.0;
      v = best_v;
      continue;
    }
    const double s = 1.0 / (1.1 * L + 1.0 / t);
    vprev = v;
    gprev = gv;
    v = K.project(v - s * (gv + (v - z) / t));
    if (!v.allFinite())
      throw ConvergenceError("prox_boundary: iterates diverged (pathological G?)");
  }
  throw ConvergenceError("prox_boundary: inner loop failed to converge");
}

double law_residual(const BoundaryLaw& law, const VectorXd& z, const VectorXd& w) {
  if (!law.is_subdifferential()) {
    return (w - law.matrix_law().M * z).norm();
  }
  const auto& sd = law.subdiff();
  const VectorXd zp = sd.K.project(z);
  const VectorXd r = w - sd.G.gradient(z);
  return (z - zp).norm() + (r - sd.K.project_normal_cone(zp, r)).norm();
}

double law_residual(const BoundaryLaw& law, const BoundaryPair& z, const BoundaryPair& w) {
  return law_residual(law, z.as_vector(), w.as_vector());
}

}  // namespace philap
