#pragma once

#include <Eigen/Dense>

#include <vector>

namespace philap::detail {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Type-II Anderson mixing on a fixed-point map x -> f(x). Callers feed
/// (x_k, f(x_k)) pairs and receive a candidate for x_{k+1}; with depth 0 or
/// a single pair this is plain iteration. Safeguarding (falling back to the
/// damped step when the candidate is worse) is the caller's business.
class Anderson {
 public:
  explicit Anderson(int depth) : depth_(depth) {}

  void reset() {
    xs_.clear();
    fs_.clear();
  }

  VectorXd next(const VectorXd& x, const VectorXd& fx) {
    if (depth_ <= 0) return fx;
    xs_.push_back(x);
    fs_.push_back(fx);
    if (static_cast<int>(xs_.size()) > depth_ + 1) {
      xs_.erase(xs_.begin());
      fs_.erase(fs_.begin());
    }
    const int m = static_cast<int>(xs_.size()) - 1;
    if (m == 0) return fx;

    const VectorXd rk = fx - x;
    MatrixXd dR(x.size(), m), dF(x.size(), m);
    for (int i = 0; i < m; ++i) {
      dR.col(i) = (fs_[i + 1] - xs_[i + 1]) - (fs_[i] - xs_[i]);
      dF.col(i) = fs_[i + 1] - fs_[i];
    }
    const VectorXd gamma = dR.colPivHouseholderQr().solve(rk);
    return fx - dF * gamma;
  }

 private:
  int depth_;
  std::vector<VectorXd> xs_, fs_;
};

}  // namespace philap::detail
