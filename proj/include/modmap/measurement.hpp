#pragma once

#include <Eigen/Cholesky>
#include <memory>
#include <optional>
#include <vector>

#include "modmap/core.hpp"

namespace modmap {

// Proximal solver bound to one (model, rho) pair. Instances are immutable:
// whatever factorizations they need are built at construction, so apply() is
// pure and safe to call concurrently for distinct n.
class MeasurementProx {
 public:
  virtual ~MeasurementProx() = default;
  // argmin_x nll(n, x) + (rho/2) ||x - x_tilde||^2
  virtual Vector apply(Index n, const Vector& x_tilde) const = 0;
};

class MeasurementModel {
 public:
  virtual ~MeasurementModel() = default;
  virtual Index state_dim() const = 0;
  virtual Index length() const = 0;
  // Negative log likelihood of trial n at state x, up to terms constant in x.
  virtual double nll(Index n, const Vector& x) const = 0;
  virtual std::unique_ptr<MeasurementProx> prox_operator(double rho) const = 0;

  // One-off prox evaluation (builds a throwaway operator; loops should hold
  // a prox_operator instead).
  Vector prox(Index n, const Vector& x_tilde, double rho) const;
};

// nll(n, x) = ||y_n - F_n x||^2. Regressors either one per time index or a
// single matrix shared by all of them.
class LinearGaussianMeasurement final : public MeasurementModel {
 public:
  LinearGaussianMeasurement(Matrix regressor, Matrix observations);
  LinearGaussianMeasurement(std::vector<Matrix> regressors, Matrix observations);

  Index state_dim() const override { return k_; }
  Index length() const override { return y_.cols(); }
  double nll(Index n, const Vector& x) const override;
  // Closed form (F_n^T F_n + (rho/2) I)^{-1} (F_n^T y_n + (rho/2) x_tilde),
  // Cholesky factorizations built once per (model, rho).
  std::unique_ptr<MeasurementProx> prox_operator(double rho) const override;

  const Matrix& regressor(Index n) const { return shared_ ? f_.front() : f_[n]; }
  const Matrix& observations() const { return y_; }

 private:
  void check();

  std::vector<Matrix> f_;
  Matrix y_;  // P x N
  Index k_ = 0;
  bool shared_ = false;
};

// Parameters of the trial-structured behavioral likelihood. A modality's
// parameters are read only when the observations carry that modality.
struct LearningParams {
  double nu = -1.1;      // binary: baseline log odds
  double eta = 2.0;      // binary: state gain
  double psi = 0.5;      // reaction: baseline log time
  double omega = -1.0;   // reaction: state gain, <= 0
  double sigma_r = 0.25; // reaction: log-time noise sd, > 0
  double xi = 2.3;       // spikes: baseline log rate
  double a = 0.8;        // spikes: state gain
  std::vector<double> c = {-2.0, -1.0};  // spikes: history weights, c[m-1] multiplies s_{j-m}
  double dt = 1e-2;      // spikes: bin width, > 0

  void validate() const;
};

// Per-trial observations; absent fields switch the modality off entirely.
struct LearningObservations {
  std::optional<Eigen::VectorXi> success;   // b_n in {0,1}
  std::optional<Vector> reaction;           // r_n, log reaction time
  std::optional<Eigen::MatrixXi> spikes;    // J x N, entries in {0,1}
};

// Scalar-state (K = 1) likelihood summing the active modalities:
//   binary    log(1 + exp(nu + eta x)) - b_n eta x
//   reaction  (r_n - psi - omega x)^2 / (2 sigma_r^2)
//   spikes    dt e^{xi + a x} sum_j e^{sum_m c_m s_{n,j-m}} - a x sum_j s_{n,j}
// (constants in x dropped; spike history indices j - m <= 0 read as 0).
class LearningMeasurement final : public MeasurementModel {
 public:
  LearningMeasurement(LearningParams params, LearningObservations obs);

  Index state_dim() const override { return 1; }
  Index length() const override { return n_; }
  double nll(Index n, const Vector& x) const override;
  std::unique_ptr<MeasurementProx> prox_operator(double rho) const override;

  double nll_at(Index n, double x) const;
  // Safeguarded Newton on the strictly convex prox objective; the returned
  // point satisfies |prox_gradient| <= 1e-9.
  double prox_at(Index n, double x_tilde, double rho) const;
  // d/dx [nll(n, x) + (rho/2)(x - x_tilde)^2], exposed for optimality checks.
  double prox_gradient(Index n, double x, double x_tilde, double rho) const;

  const LearningParams& params() const { return p_; }
  const LearningObservations& observations() const { return obs_; }

 private:
  double derivative(Index n, double x) const;
  double second_derivative(Index n, double x) const;

  LearningParams p_;
  LearningObservations obs_;
  Index n_ = 0;
  Vector spike_count_;  // sum_j s_{n,j}
  Vector history_sum_;  // sum_j exp(sum_m c_m s_{n,j-m})
};

}  // namespace modmap
