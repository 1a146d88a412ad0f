#include "philap/grid.hpp"

#include "philap/phi_map.hpp"

namespace philap {

MatrixXd forward_differences(const GridFunction& u) {
  const int cols = static_cast<int>(u.values.cols());
  return u.values.rightCols(cols - 1) - u.values.leftCols(cols - 1);
}

double sup_diff(const GridFunction& u) {
  const MatrixXd d = forward_differences(u);
  double m = 0.0;
  for (int k = 0; k < d.cols(); ++k) m = std::max(m, d.col(k).norm());
  return m;
}

NormsAndSplit norms_and_split(const GridFunction& u) {
  NormsAndSplit r;
  const int T = u.horizon();
  r.norm_T = u.values.middleCols(1, T).norm();
  r.norm_T2 = u.values.norm();
  r.sup_diff = sup_diff(u);
  r.mean = u.values.rowwise().mean();
  r.tilde.values = u.values.colwise() - r.mean;
  return r;
}

BilinearTerms bilinear_terms(const PhiMap& phi, const GridFunction& u,
                             const GridFunction& v) {
  if (u.dim() != v.dim() || u.horizon() != v.horizon())
    throw std::invalid_argument("bilinear_terms: mismatched grid functions");
  const double a = phi.radius();
  if (sup_diff(u) >= a || sup_diff(v) >= a)
    throw std::domain_error("bilinear_terms: sup |Delta| must be < phi radius");

  const int T = u.horizon();
  const MatrixXd du = forward_differences(u);
  const MatrixXd dv = forward_differences(v);
  MatrixXd pu(u.dim(), T + 1), pv(u.dim(), T + 1);
  for (int k = 0; k <= T; ++k) {
    pu.col(k) = phi.value(du.col(k));
    pv.col(k) = phi.value(dv.col(k));
  }
  const MatrixXd dp = pu - pv;

  BilinearTerms out{0.0, 0.0, 0.0};
  out.omega = dp.col(0).dot(u.values.col(0) - v.values.col(0)) -
              dp.col(T).dot(u.values.col(T + 1) - v.values.col(T + 1));
  for (int n = 1; n <= T; ++n)
    out.O -= (dp.col(n) - dp.col(n - 1)).dot(u.values.col(n) - v.values.col(n));
  for (int k = 0; k <= T; ++k) out.M += dp.col(k).dot(du.col(k) - dv.col(k));
  return out;
}

}  // namespace philap
