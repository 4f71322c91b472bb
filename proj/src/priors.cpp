#include "modmap/priors.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "modmap/kernels.hpp"

namespace modmap {

double SystemPrior::check_prox_args(const Matrix& w_tilde, double beta, double rho) {
  if (w_tilde.rows() < 1 || w_tilde.cols() < 1)
    throw ShapeError("prox argument must be at least 1 x 1");
  if (!(rho > 0.0) || !std::isfinite(rho)) throw ConfigError("rho must be finite and > 0");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be finite and >= 0");
  return beta / rho;
}

GaussianPrior::GaussianPrior(double gamma, double sigma_v) : gamma_(gamma), sigma_v_(sigma_v) {
  if (!(sigma_v > 0.0) || !std::isfinite(sigma_v)) throw ConfigError("sigma_v must be finite and > 0");
  if (!std::isfinite(gamma)) throw ConfigError("gamma must be finite");
}

double GaussianPrior::phi(const Matrix& w) const {
  const double var2 = 2.0 * sigma_v_ * sigma_v_;
  return (w.array() - gamma_).square().sum() / var2;
}

Matrix GaussianPrior::prox(const Matrix& w_tilde, double beta, double rho) const {
  check_prox_args(w_tilde, beta, rho);
  const double inv_var = 1.0 / (sigma_v_ * sigma_v_);
  const double denom = beta * inv_var + rho;
  const double scale = rho / denom;
  const double shift = beta * gamma_ * inv_var / denom;
  Matrix out(w_tilde.rows(), w_tilde.cols());
  kernels::affine(w_tilde.data(), out.data(), static_cast<std::size_t>(w_tilde.size()), scale,
                  shift);
  return out;
}

double L1Prior::phi(const Matrix& w) const { return w.array().abs().sum(); }

Matrix L1Prior::prox(const Matrix& w_tilde, double beta, double rho) const {
  const double t = check_prox_args(w_tilde, beta, rho);
  Matrix out(w_tilde.rows(), w_tilde.cols());
  kernels::soft_threshold(w_tilde.data(), out.data(), static_cast<std::size_t>(w_tilde.size()), t);
  return out;
}

double GroupSparsePrior::phi(const Matrix& w) const {
  double total = 0.0;
  for (Index k = 0; k < w.rows(); ++k) total += w.row(k).norm();
  return total;
}

Matrix GroupSparsePrior::prox(const Matrix& w_tilde, double beta, double rho) const {
  const double t = check_prox_args(w_tilde, beta, rho);
  const Index k = w_tilde.rows(), n = w_tilde.cols();
  // Row norms accumulated column-by-column so the running sums live in the
  // contiguous K-vector a SIMD lane set can work on.
  Vector sq = Vector::Zero(k);
  for (Index j = 0; j < n; ++j)
    kernels::accumulate_sq(w_tilde.col(j).data(), sq.data(), static_cast<std::size_t>(k));
  Vector factor(k);
  for (Index i = 0; i < k; ++i) {
    const double norm = std::sqrt(sq(i));
    factor(i) = norm > t ? 1.0 - t / norm : 0.0;
  }
  Matrix out(k, n);
  for (Index j = 0; j < n; ++j)
    kernels::mul(w_tilde.col(j).data(), factor.data(), out.col(j).data(),
                 static_cast<std::size_t>(k));
  return out;
}

double NuclearNormPrior::phi(const Matrix& w) const {
  return Eigen::BDCSVD<Matrix>(w).singularValues().sum();
}

Matrix NuclearNormPrior::prox(const Matrix& w_tilde, double beta, double rho) const {
  const double t = check_prox_args(w_tilde, beta, rho);
  // A zero threshold shrinks nothing; skip the SVD so the identity is exact.
  if (t == 0.0) return w_tilde;
  Eigen::BDCSVD<Matrix> svd(w_tilde, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vector sv = svd.singularValues();
  const double sigma_max = sv.size() > 0 ? sv(0) : 0.0;
  const double floor = 1e-12 * sigma_max;
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i) {
    const double shrunk = sv(i) - t;
    sv(i) = shrunk > floor ? shrunk : 0.0;
    if (sv(i) > 0.0) rank = i + 1;
  }
  if (rank == 0) return Matrix::Zero(w_tilde.rows(), w_tilde.cols());
  return svd.matrixU().leftCols(rank) * sv.head(rank).asDiagonal() *
         svd.matrixV().leftCols(rank).transpose();
}

}  // namespace modmap
