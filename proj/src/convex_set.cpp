#include "philap/convex_set.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace philap {

namespace {
constexpr double kOrthTol = 1e-12;
}

ConvexSet ConvexSet::point(VectorXd z0) {
  ConvexSet s;
  s.kind_ = Kind::point;
  s.ambient_ = static_cast<int>(z0.size());
  s.point_ = std::move(z0);
  return s;
}

ConvexSet ConvexSet::full_space(int ambient_dim) {
  ConvexSet s;
  s.kind_ = Kind::full_space;
  s.ambient_ = ambient_dim;
  return s;
}

ConvexSet ConvexSet::product(ConvexSet left, ConvexSet right) {
  ConvexSet s;
  s.kind_ = Kind::product;
  s.ambient_ = left.ambient_ + right.ambient_;
  s.left_ = std::make_shared<ConvexSet>(std::move(left));
  s.right_ = std::make_shared<ConvexSet>(std::move(right));
  return s;
}

ConvexSet ConvexSet::graph_of_orthogonal(MatrixXd U) {
  if (U.rows() != U.cols())
    throw std::invalid_argument("ConvexSet: U must be square");
  const MatrixXd err = U.transpose() * U - MatrixXd::Identity(U.rows(), U.cols());
  if (err.cwiseAbs().maxCoeff() > kOrthTol)
    throw std::invalid_argument("ConvexSet: U must be orthogonal");
  ConvexSet s;
  s.kind_ = Kind::graph_of_orthogonal;
  s.ambient_ = 2 * static_cast<int>(U.rows());
  s.orth_ = std::move(U);
  return s;
}

ConvexSet ConvexSet::linear_subspace(MatrixXd basis) {
  if (basis.cols() == 0 || basis.rows() == 0)
    throw std::invalid_argument("ConvexSet: empty subspace basis (use point(0))");
  // Orthonormalize via thin QR, dropping dependent columns.
  Eigen::ColPivHouseholderQR<MatrixXd> qr(basis);
  const int rank = static_cast<int>(qr.rank());
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(basis.rows(), rank);
  ConvexSet s;
  s.kind_ = Kind::linear_subspace;
  s.ambient_ = static_cast<int>(basis.rows());
  s.basis_ = std::move(q);
  return s;
}

ConvexSet ConvexSet::strip(int half_dim, double sigma) {
  if (sigma <= 0.0) throw std::invalid_argument("ConvexSet: strip needs sigma > 0");
  ConvexSet s;
  s.kind_ = Kind::strip;
  s.ambient_ = 2 * half_dim;
  s.sigma_ = sigma;
  return s;
}

ConvexSet ConvexSet::box(VectorXd lower, VectorXd upper) {
  if (lower.size() != upper.size())
    throw std::invalid_argument("ConvexSet: box bounds mismatch");
  for (int i = 0; i < lower.size(); ++i)
    if (!(lower[i] <= upper[i]))
      throw std::invalid_argument("ConvexSet: box needs lower <= upper");
  ConvexSet s;
  s.kind_ = Kind::box;
  s.ambient_ = static_cast<int>(lower.size());
  s.lower_ = std::move(lower);
  s.upper_ = std::move(upper);
  return s;
}

VectorXd ConvexSet::project(const VectorXd& z) const {
  switch (kind_) {
    case Kind::point:
      return point_;
    case Kind::full_space:
      return z;
    case Kind::product: {
      VectorXd out(ambient_);
      out.head(left_->ambient_) = left_->project(z.head(left_->ambient_));
      out.tail(right_->ambient_) = right_->project(z.tail(right_->ambient_));
      return out;
    }
    case Kind::graph_of_orthogonal: {
      const int n = ambient_ / 2;
      const VectorXd x = 0.5 * (z.head(n) + orth_.transpose() * z.tail(n));
      VectorXd out(ambient_);
      out.head(n) = x;
      out.tail(n) = orth_ * x;
      return out;
    }
    case Kind::linear_subspace:
      return basis_ * (basis_.transpose() * z);
    case Kind::strip: {
      const int n = ambient_ / 2;
      const VectorXd d = z.head(n) - z.tail(n);
      const double nd = d.norm();
      if (nd <= sigma_) return z;
      const VectorXd shift = (0.5 * (nd - sigma_) / nd) * d;
      VectorXd out(ambient_);
      out.head(n) = z.head(n) - shift;
      out.tail(n) = z.tail(n) + shift;
      return out;
    }
    case Kind::box:
      return z.cwiseMax(lower_).cwiseMin(upper_);
  }
  return z;
}

VectorXd ConvexSet::project_normal_cone(const VectorXd& z, const VectorXd& w) const {
  switch (kind_) {
    case Kind::point:
      return w;
    case Kind::full_space:
      return VectorXd::Zero(ambient_);
    case Kind::product: {
      VectorXd out(ambient_);
      out.head(left_->ambient_) =
          left_->project_normal_cone(z.head(left_->ambient_), w.head(left_->ambient_));
      out.tail(right_->ambient_) =
          right_->project_normal_cone(z.tail(right_->ambient_), w.tail(right_->ambient_));
      return out;
    }
    case Kind::graph_of_orthogonal: {
      // N = Z-perp = {(-U'v, v)}.
      const int n = ambient_ / 2;
      const VectorXd v = 0.5 * (w.tail(n) - orth_ * w.head(n));
      VectorXd out(ambient_);
      out.head(n) = -orth_.transpose() * v;
      out.tail(n) = v;
      return out;
    }
    case Kind::linear_subspace:
      return w - basis_ * (basis_.transpose() * w);
    case Kind::strip: {
      const int n = ambient_ / 2;
      const VectorXd d = z.head(n) - z.tail(n);
      const double nd = d.norm();
      if (nd < sigma_ * (1.0 - 1e-12)) return VectorXd::Zero(ambient_);
      VectorXd dir(ambient_);
      dir.head(n) = d / nd;
      dir.tail(n) = -d / nd;
      dir /= std::sqrt(2.0);
      const double t = std::max(0.0, dir.dot(w));
      return t * dir;
    }
    case Kind::box: {
      VectorXd out = VectorXd::Zero(ambient_);
      for (int i = 0; i < ambient_; ++i) {
        const bool at_lo = z[i] <= lower_[i] + 1e-12 * (1.0 + std::abs(lower_[i]));
        const bool at_hi = z[i] >= upper_[i] - 1e-12 * (1.0 + std::abs(upper_[i]));
        if (at_lo && at_hi)
          out[i] = w[i];
        else if (at_lo)
          out[i] = std::min(w[i], 0.0);
        else if (at_hi)
          out[i] = std::max(w[i], 0.0);
      }
      return out;
    }
  }
  return w;
}

VectorXd ConvexSet::project_cone_hull(const VectorXd& z) const {
  switch (kind_) {
    case Kind::point: {
      if (point_.norm() == 0.0) return VectorXd::Zero(ambient_);
      const VectorXd dir = point_.normalized();
      return std::max(0.0, dir.dot(z)) * dir;
    }
    case Kind::full_space:
      return z;
    case Kind::product: {
      VectorXd out(ambient_);
      out.head(left_->ambient_) = left_->project_cone_hull(z.head(left_->ambient_));
      out.tail(right_->ambient_) = right_->project_cone_hull(z.tail(right_->ambient_));
      return out;
    }
    case Kind::graph_of_orthogonal:
    case Kind::linear_subspace:
      return project(z);
    case Kind::strip:
      return z;  // 0 is interior, so the conical hull is everything
    case Kind::box: {
      VectorXd out = z;
      for (int i = 0; i < ambient_; ++i) {
        if (lower_[i] == 0.0 && upper_[i] == 0.0)
          out[i] = 0.0;
        else if (lower_[i] == 0.0)
          out[i] = std::max(z[i], 0.0);
        else if (upper_[i] == 0.0)
          out[i] = std::min(z[i], 0.0);
      }
      return out;
    }
  }
  return z;
}

bool ConvexSet::is_affine_subspace() const {
  switch (kind_) {
    case Kind::point:
    case Kind::full_space:
    case Kind::graph_of_orthogonal:
    case Kind::linear_subspace:
      return true;
    case Kind::product:
      return left_->is_affine_subspace() && right_->is_affine_subspace();
    default:
      return false;
  }
}

void ConvexSet::affine_parameterization(VectorXd& offset, MatrixXd& basis) const {
  switch (kind_) {
    case Kind::point:
      offset = point_;
      basis = MatrixXd::Zero(ambient_, 0);
      return;
    case Kind::full_space:
      offset = VectorXd::Zero(ambient_);
      basis = MatrixXd::Identity(ambient_, ambient_);
      return;
    case Kind::graph_of_orthogonal: {
      const int n = ambient_ / 2;
      offset = VectorXd::Zero(ambient_);
      basis.resize(ambient_, n);
      basis.topRows(n) = MatrixXd::Identity(n, n) / std::sqrt(2.0);
      basis.bottomRows(n) = orth_ / std::sqrt(2.0);
      return;
    }
    case Kind::linear_subspace:
      offset = VectorXd::Zero(ambient_);
      basis = basis_;
      return;
    case Kind::product: {
      VectorXd ol, orr;
      MatrixXd bl, br;
      left_->affine_parameterization(ol, bl);
      right_->affine_parameterization(orr, br);
      offset.resize(ambient_);
      offset << ol, orr;
      basis = MatrixXd::Zero(ambient_, bl.cols() + br.cols());
      basis.topLeftCorner(left_->ambient_, bl.cols()) = bl;
      basis.bottomRightCorner(right_->ambient_, br.cols()) = br;
      return;
    }
    default:
      throw std::logic_error("ConvexSet: not an affine subspace");
  }
}

}  // namespace philap
