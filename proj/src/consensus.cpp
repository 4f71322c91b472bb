#include "modmap/consensus.hpp"

#include <Eigen/Cholesky>

namespace modmap {

ConsensusSolver::ConsensusSolver(const TransitionModel& t, Index n) : n_(n), d_(t.d()) {
  if (n < 1) throw ShapeError("consensus solver needs at least one time index");
  const Index k = d_.rows();
  const Matrix eye2 = 2.0 * Matrix::Identity(k, k);
  const Matrix dtd = d_.transpose() * d_;

  diag_l_.reserve(static_cast<std::size_t>(n));
  sub_.reserve(static_cast<std::size_t>(n > 0 ? n - 1 : 0));
  Matrix pivot = n == 1 ? eye2 : Matrix(eye2 + dtd);
  for (Index i = 0; i < n; ++i) {
    Eigen::LLT<Matrix> llt(pivot);
    if (llt.info() != Eigen::Success)
      throw NumericError("consensus pivot block is not positive definite at index " +
                             std::to_string(i),
                         i);
    diag_l_.push_back(llt.matrixL());
    if (i + 1 < n) {
      // X solves X L_i^T = -D; stored as the subdiagonal factor block.
      Matrix xt = diag_l_.back().triangularView<Eigen::Lower>().solve(Matrix(-d_.transpose()));
      sub_.push_back(xt.transpose());
      const Matrix& x = sub_.back();
      pivot = (i + 2 < n ? Matrix(eye2 + dtd) : eye2) - x * x.transpose();
    }
  }
}

Matrix ConsensusSolver::solve(const Matrix& zx_tilde, const Matrix& zw_tilde) const {
  const Index k = d_.rows();
  if (zx_tilde.rows() != k || zx_tilde.cols() != n_ || zw_tilde.rows() != k ||
      zw_tilde.cols() != n_)
    throw ShapeError("consensus inputs must be " + std::to_string(k) + " x " +
                     std::to_string(n_));

  Matrix rhs;
  detail::transition_adjoint_into(zw_tilde, d_, rhs);
  rhs += zx_tilde;

  // Forward sweep L y = rhs, then backward sweep L^T z = y, blockwise.
  Matrix y(k, n_);
  y.col(0) = diag_l_[0].triangularView<Eigen::Lower>().solve(rhs.col(0));
  for (Index i = 1; i < n_; ++i)
    y.col(i) = diag_l_[i].triangularView<Eigen::Lower>().solve(
        Vector(rhs.col(i) - sub_[i - 1] * y.col(i - 1)));

  Matrix z(k, n_);
  z.col(n_ - 1) =
      diag_l_[n_ - 1].transpose().triangularView<Eigen::Upper>().solve(y.col(n_ - 1));
  for (Index i = n_ - 2; i >= 0; --i)
    z.col(i) = diag_l_[i].transpose().triangularView<Eigen::Upper>().solve(
        Vector(y.col(i) - sub_[i].transpose() * z.col(i + 1)));
  return z;
}

LatentSeries ConsensusSolver::solve(const LatentSeries& zx_tilde,
                                    const LatentSeries& zw_tilde) const {
  return LatentSeries(solve(zx_tilde.values(), zw_tilde.values()));
}

Matrix ConsensusSolver::dense_system(const TransitionModel& t, Index n) {
  const Index k = t.state_dim();
  Matrix g = Matrix::Zero(k * n, k * n);
  for (Index i = 0; i < n; ++i) {
    g.block(i * k, i * k, k, k) = Matrix::Identity(k, k);
    if (i > 0) g.block(i * k, (i - 1) * k, k, k) = -t.d();
  }
  return Matrix::Identity(k * n, k * n) + g.transpose() * g;
}

}  // namespace modmap
