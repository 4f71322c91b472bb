#include "modmap/core.hpp"

#include <cmath>

#include "modmap/measurement.hpp"
#include "modmap/priors.hpp"

namespace modmap {

namespace {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    for (Index n = 0; n < m.cols(); ++n)
      if (!m.col(n).allFinite())
        throw NumericError(std::string(what) + " has a non-finite entry at column " +
                               std::to_string(n),
                           n);
    throw NumericError(std::string(what) + " has a non-finite entry");
  }
}

}  // namespace

LatentSeries::LatentSeries(Matrix values) : values_(std::move(values)) {
  if (values_.rows() < 1 || values_.cols() < 1)
    throw ShapeError("latent series must be at least 1 x 1, got " +
                     std::to_string(values_.rows()) + " x " + std::to_string(values_.cols()));
  require_finite(values_, "latent series");
}

LatentSeries LatentSeries::zero(Index k, Index n) { return LatentSeries(Matrix::Zero(k, n)); }

TransitionModel::TransitionModel(Matrix d) : d_(std::move(d)) {
  if (d_.rows() < 1 || d_.rows() != d_.cols())
    throw ShapeError("transition matrix must be square and non-empty, got " +
                     std::to_string(d_.rows()) + " x " + std::to_string(d_.cols()));
  require_finite(d_, "transition matrix");
}

TransitionModel TransitionModel::scalar(double kappa) {
  Matrix d(1, 1);
  d(0, 0) = kappa;
  return TransitionModel(std::move(d));
}

TransitionModel TransitionModel::identity(Index k) {
  return TransitionModel(Matrix::Identity(k, k));
}

void AdmmConfig::validate() const {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw ConfigError("rho must be finite and > 0");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be finite and >= 0");
  if (!(eps_rel > 0.0) || !std::isfinite(eps_rel))
    throw ConfigError("eps_rel must be finite and > 0");
  if (!(eps_abs > 0.0) || !std::isfinite(eps_abs))
    throw ConfigError("eps_abs must be finite and > 0");
  if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
}

namespace detail {

void transition_into(const Matrix& x, const Matrix& d, Matrix& out) {
  const Index n = x.cols();
  out.resize(x.rows(), n);
  out.col(0) = x.col(0);
  if (n > 1) out.rightCols(n - 1) = x.rightCols(n - 1) - d * x.leftCols(n - 1);
}

void transition_adjoint_into(const Matrix& a, const Matrix& d, Matrix& out) {
  const Index n = a.cols();
  out = a;
  if (n > 1) out.leftCols(n - 1) -= d.transpose() * a.rightCols(n - 1);
}

}  // namespace detail

namespace {

void require_same_dim(const LatentSeries& x, const TransitionModel& t) {
  if (x.state_dim() != t.state_dim())
    throw ShapeError("state dimension mismatch: series is " + std::to_string(x.state_dim()) +
                     ", transition is " + std::to_string(t.state_dim()));
}

}  // namespace

LatentSeries apply_transition(const LatentSeries& x, const TransitionModel& t) {
  require_same_dim(x, t);
  Matrix out;
  detail::transition_into(x.values(), t.d(), out);
  return LatentSeries(std::move(out));
}

LatentSeries apply_transition_adjoint(const LatentSeries& a, const TransitionModel& t) {
  require_same_dim(a, t);
  Matrix out;
  detail::transition_adjoint_into(a.values(), t.d(), out);
  return LatentSeries(std::move(out));
}

LatentSeries invert_transition(const LatentSeries& w, const TransitionModel& t) {
  require_same_dim(w, t);
  Matrix x(w.state_dim(), w.length());
  x.col(0) = w.values().col(0);
  for (Index n = 1; n < w.length(); ++n) x.col(n) = w.values().col(n) + t.d() * x.col(n - 1);
  return LatentSeries(std::move(x));
}

double objective(const LatentSeries& x, const MeasurementModel& meas, const SystemPrior& prior,
                 const TransitionModel& t, double beta) {
  if (x.state_dim() != meas.state_dim() || x.length() != meas.length())
    throw ShapeError("series shape does not match measurement model");
  double nll = 0.0;
  for (Index n = 0; n < x.length(); ++n) {
    const double term = meas.nll(n, x.col(n));
    if (!std::isfinite(term))
      throw NumericError("non-finite likelihood at time index " + std::to_string(n), n);
    nll += term;
  }
  const LatentSeries w = apply_transition(x, t);
  const double penalty = prior.phi(w.values());
  if (!std::isfinite(penalty)) throw NumericError("non-finite prior penalty");
  return nll + beta * penalty;
}

}  // namespace modmap
