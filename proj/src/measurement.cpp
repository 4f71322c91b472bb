#include "modmap/measurement.hpp"

#include <algorithm>
#include <cmath>

namespace modmap {

Vector MeasurementModel::prox(Index n, const Vector& x_tilde, double rho) const {
  return prox_operator(rho)->apply(n, x_tilde);
}

namespace {

// log(1 + e^u) without overflow.
double log1p_exp(double u) { return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u)); }

// 1 / (1 + e^{-u}).
double logistic(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

class LinearGaussianProx final : public MeasurementProx {
 public:
  LinearGaussianProx(const std::vector<Matrix>& f, const Matrix& y, bool shared, double rho)
      : half_rho_(rho / 2.0) {
    const Index k = f.front().cols();
    fty_.resize(k, y.cols());
    if (shared) {
      fty_ = f.front().transpose() * y;
    } else {
      for (Index n = 0; n < y.cols(); ++n) fty_.col(n) = f[n].transpose() * y.col(n);
    }
    const Matrix ridge = half_rho_ * Matrix::Identity(k, k);
    llt_.reserve(shared ? 1 : static_cast<std::size_t>(y.cols()));
    for (std::size_t i = 0; i < (shared ? 1u : f.size()); ++i) {
      llt_.emplace_back(Matrix(f[i].transpose() * f[i] + ridge));
      if (llt_.back().info() != Eigen::Success)
        throw NumericError("measurement prox factorization failed at index " + std::to_string(i),
                           static_cast<Index>(i));
    }
  }

  Vector apply(Index n, const Vector& x_tilde) const override {
    const auto& llt = llt_.size() == 1 ? llt_.front() : llt_[n];
    return llt.solve(fty_.col(n) + half_rho_ * x_tilde);
  }

 private:
  double half_rho_;
  Matrix fty_;
  std::vector<Eigen::LLT<Matrix>> llt_;
};

}  // namespace

LinearGaussianMeasurement::LinearGaussianMeasurement(Matrix regressor, Matrix observations)
    : f_{std::move(regressor)}, y_(std::move(observations)), shared_(true) {
  check();
}

LinearGaussianMeasurement::LinearGaussianMeasurement(std::vector<Matrix> regressors,
                                                     Matrix observations)
    : f_(std::move(regressors)), y_(std::move(observations)), shared_(false) {
  if (f_.empty()) throw ShapeError("regressor list is empty");
  if (static_cast<Index>(f_.size()) != y_.cols())
    throw ShapeError("got " + std::to_string(f_.size()) + " regressors for " +
                     std::to_string(y_.cols()) + " observation columns");
  check();
}

void LinearGaussianMeasurement::check() {
  if (y_.rows() < 1 || y_.cols() < 1) throw ShapeError("observations must be at least 1 x 1");
  if (!y_.allFinite()) throw NumericError("observations contain a non-finite entry");
  k_ = f_.front().cols();
  for (const Matrix& f : f_) {
    if (f.rows() != y_.rows() || f.cols() != k_)
      throw ShapeError("regressor shape " + std::to_string(f.rows()) + " x " +
                       std::to_string(f.cols()) + " does not match observations with " +
                       std::to_string(y_.rows()) + " rows");
    if (!f.allFinite()) throw NumericError("regressor contains a non-finite entry");
  }
}

double LinearGaussianMeasurement::nll(Index n, const Vector& x) const {
  if (x.size() != k_) throw ShapeError("state size does not match regressor columns");
  return (y_.col(n) - regressor(n) * x).squaredNorm();
}

std::unique_ptr<MeasurementProx> LinearGaussianMeasurement::prox_operator(double rho) const {
  if (!(rho > 0.0)) throw ConfigError("rho must be > 0");
  return std::make_unique<LinearGaussianProx>(f_, y_, shared_, rho);
}

void LearningParams::validate() const {
  if (!(sigma_r > 0.0)) throw ConfigError("sigma_r must be > 0");
  if (omega > 0.0) throw ConfigError("omega must be <= 0");
  if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
}

LearningMeasurement::LearningMeasurement(LearningParams params, LearningObservations obs)
    : p_(std::move(params)), obs_(std::move(obs)) {
  p_.validate();
  n_ = 0;
  auto take_length = [this](Index len, const char* what) {
    if (len < 1) throw ShapeError(std::string(what) + " is empty");
    if (n_ == 0)
      n_ = len;
    else if (n_ != len)
      throw ShapeError(std::string(what) + " has " + std::to_string(len) + " trials, expected " +
                       std::to_string(n_));
  };
  if (obs_.success) {
    take_length(obs_.success->size(), "success sequence");
    for (Index n = 0; n < n_; ++n)
      if ((*obs_.success)(n) != 0 && (*obs_.success)(n) != 1)
        throw ConfigError("success values must be 0 or 1");
  }
  if (obs_.reaction) {
    take_length(obs_.reaction->size(), "reaction sequence");
    if (!obs_.reaction->allFinite()) throw NumericError("reaction times contain a non-finite entry");
  }
  if (obs_.spikes) {
    take_length(obs_.spikes->cols(), "spike raster");
    const auto& s = *obs_.spikes;
    for (Index j = 0; j < s.rows(); ++j)
      for (Index n = 0; n < s.cols(); ++n)
        if (s(j, n) != 0 && s(j, n) != 1) throw ConfigError("spike values must be 0 or 1");
    const Index j_bins = s.rows();
    const Index m = static_cast<Index>(p_.c.size());
    spike_count_.resize(n_);
    history_sum_.resize(n_);
    for (Index n = 0; n < n_; ++n) {
      double count = 0.0, hsum = 0.0;
      for (Index j = 0; j < j_bins; ++j) {
        count += s(j, n);
        double h = 0.0;
        for (Index mm = 1; mm <= m; ++mm)
          if (j - mm >= 0) h += p_.c[mm - 1] * s(j - mm, n);
        hsum += std::exp(h);
      }
      spike_count_(n) = count;
      history_sum_(n) = hsum;
    }
  }
  if (n_ == 0) throw ShapeError("learning observations carry no modality");
}

double LearningMeasurement::nll_at(Index n, double x) const {
  double total = 0.0;
  if (obs_.success)
    total += log1p_exp(p_.nu + p_.eta * x) - (*obs_.success)(n) * p_.eta * x;
  if (obs_.reaction) {
    const double resid = (*obs_.reaction)(n) - p_.psi - p_.omega * x;
    total += resid * resid / (2.0 * p_.sigma_r * p_.sigma_r);
  }
  if (obs_.spikes)
    total += p_.dt * std::exp(p_.xi + p_.a * x) * history_sum_(n) - p_.a * x * spike_count_(n);
  return total;
}

double LearningMeasurement::nll(Index n, const Vector& x) const {
  if (x.size() != 1) throw ShapeError("learning likelihood is defined for scalar states");
  return nll_at(n, x(0));
}

double LearningMeasurement::derivative(Index n, double x) const {
  double total = 0.0;
  if (obs_.success)
    total += p_.eta * (logistic(p_.nu + p_.eta * x) - (*obs_.success)(n));
  if (obs_.reaction)
    total += -p_.omega * ((*obs_.reaction)(n) - p_.psi - p_.omega * x) /
             (p_.sigma_r * p_.sigma_r);
  if (obs_.spikes)
    total += p_.a * p_.dt * std::exp(p_.xi + p_.a * x) * history_sum_(n) -
             p_.a * spike_count_(n);
  return total;
}

double LearningMeasurement::second_derivative(Index n, double x) const {
  double total = 0.0;
  if (obs_.success) {
    const double s = logistic(p_.nu + p_.eta * x);
    total += p_.eta * p_.eta * s * (1.0 - s);
  }
  if (obs_.reaction) total += p_.omega * p_.omega / (p_.sigma_r * p_.sigma_r);
  if (obs_.spikes)
    total += p_.a * p_.a * p_.dt * std::exp(p_.xi + p_.a * x) * history_sum_(n);
  return total;
}

double LearningMeasurement::prox_gradient(Index n, double x, double x_tilde, double rho) const {
  return derivative(n, x) + rho * (x - x_tilde);
}

double LearningMeasurement::prox_at(Index n, double x_tilde, double rho) const {
  if (!(rho > 0.0)) throw ConfigError("rho must be > 0");
  constexpr double kTol = 1e-9;
  auto grad = [&](double x) { return prox_gradient(n, x, x_tilde, rho); };

  // Bracket the unique root of the increasing gradient, expanding
  // geometrically from [x_tilde - 50, x_tilde + 50].
  double radius = 50.0;
  double lo = x_tilde - radius, hi = x_tilde + radius;
  double glo = grad(lo), ghi = grad(hi);
  for (int e = 0; (glo > 0.0 || ghi < 0.0) && e < 60; ++e) {
    radius *= 2.0;
    if (glo > 0.0) {
      lo = x_tilde - radius;
      glo = grad(lo);
    }
    if (ghi < 0.0) {
      hi = x_tilde + radius;
      ghi = grad(hi);
    }
  }
  if (glo > 0.0 || ghi < 0.0)
    throw SolverError("could not bracket the prox stationary point at trial " + std::to_string(n));

  double x = std::clamp(x_tilde, lo, hi);
  double g = grad(x);
  for (int it = 0; it < 100 && std::abs(g) > kTol; ++it) {
    const double h = second_derivative(n, x) + rho;
    double cand = x - g / h;
    if (!std::isfinite(cand) || cand <= lo || cand >= hi) cand = 0.5 * (lo + hi);
    const double gc = grad(cand);
    if (gc > 0.0)
      hi = cand;
    else
      lo = cand;
    x = cand;
    g = gc;
  }
  for (int it = 0; it < 200 && std::abs(g) > kTol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = grad(mid);
    if (gm > 0.0)
      hi = mid;
    else
      lo = mid;
    x = mid;
    g = gm;
  }
  if (std::abs(g) > kTol)
    throw SolverError("prox solve did not reach tolerance at trial " + std::to_string(n));
  return x;
}

namespace {

class LearningProx final : public MeasurementProx {
 public:
  LearningProx(const LearningMeasurement& model, double rho) : model_(model), rho_(rho) {}
  Vector apply(Index n, const Vector& x_tilde) const override {
    Vector out(1);
    out(0) = model_.prox_at(n, x_tilde(0), rho_);
    return out;
  }

 private:
  const LearningMeasurement& model_;
  double rho_;
};

}  // namespace

std::unique_ptr<MeasurementProx> LearningMeasurement::prox_operator(double rho) const {
  if (!(rho > 0.0)) throw ConfigError("rho must be > 0");
  return std::make_unique<LearningProx>(*this, rho);
}

}  // namespace modmap
