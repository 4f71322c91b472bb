#pragma once

#include "modmap/core.hpp"

namespace modmap {

// Penalty phi on the transitioned series w = apply_transition(x), together
// with the scaled proximal map
//   prox(w_tilde, beta, rho) = argmin_w beta * phi(w) + (rho/2) ||w - w_tilde||_F^2,
// which depends on (beta, rho) only through t = beta / rho. beta = 0 makes
// every prox the identity.
class SystemPrior {
 public:
  virtual ~SystemPrior() = default;
  virtual double phi(const Matrix& w) const = 0;
  virtual Matrix prox(const Matrix& w_tilde, double beta, double rho) const = 0;

 protected:
  // Common argument checks; returns t = beta / rho.
  static double check_prox_args(const Matrix& w_tilde, double beta, double rho);
};

// phi(w) = sum_{k,n} (w_{k,n} - gamma)^2 / (2 sigma_v^2); prox is the affine
// map w = (beta gamma / sigma_v^2 + rho w_tilde) / (beta / sigma_v^2 + rho).
class GaussianPrior final : public SystemPrior {
 public:
  GaussianPrior(double gamma, double sigma_v);
  double phi(const Matrix& w) const override;
  Matrix prox(const Matrix& w_tilde, double beta, double rho) const override;
  double gamma() const { return gamma_; }
  double sigma_v() const { return sigma_v_; }

 private:
  double gamma_, sigma_v_;
};

// phi(w) = sum |w_{k,n}|; prox soft-thresholds every entry at t.
class L1Prior final : public SystemPrior {
 public:
  double phi(const Matrix& w) const override;
  Matrix prox(const Matrix& w_tilde, double beta, double rho) const override;
};

// phi(w) = sum_k ||row_k(w)||_2; prox scales each row by (1 - t/||row||)_+.
class GroupSparsePrior final : public SystemPrior {
 public:
  double phi(const Matrix& w) const override;
  Matrix prox(const Matrix& w_tilde, double beta, double rho) const override;
};

// phi(w) = sum_i sigma_i(w); prox soft-thresholds the singular values and
// rebuilds from the survivors only. Values at or below 1e-12 * sigma_max
// after thresholding are truncated to exactly zero.
class NuclearNormPrior final : public SystemPrior {
 public:
  double phi(const Matrix& w) const override;
  Matrix prox(const Matrix& w_tilde, double beta, double rho) const override;
};

}  // namespace modmap
