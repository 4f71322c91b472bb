#include "modmap/experiments.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "modmap/kernels.hpp"

namespace modmap {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

double logistic(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}
}  // namespace

void LearningSimConfig::validate() const {
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (!std::isfinite(kappa) || !std::isfinite(gamma)) throw ConfigError("kappa and gamma must be finite");
  if (!(sigma_v >= 0.0) || !std::isfinite(sigma_v)) throw ConfigError("sigma_v must be >= 0");
  if (sparse) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("p must be in [0, 1]");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma must be >= 0");
  }
  if (!binary && !reaction && !spikes) throw ConfigError("at least one modality must be enabled");
  if (spikes && bins < 1) throw ConfigError("bins must be >= 1 when spikes are enabled");
  params.validate();
}

LearningSim simulate_learning(const LearningSimConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  const Index n = cfg.trials;
  Matrix x(1, n);
  if (cfg.sparse) {
    double state = 0.0;
    for (Index i = 0; i < n; ++i) {
      double v = 0.0;
      if (uniform(rng) >= cfg.p) {
        const double a = normal(rng);
        const double b = normal(rng);
        v = cfg.sigma * (a * a + b * b);
      }
      state += v;
      x(0, i) = state;
    }
  } else {
    double state = cfg.gamma + cfg.sigma_v * normal(rng);
    x(0, 0) = state;
    for (Index i = 1; i < n; ++i) {
      state = cfg.kappa * state + cfg.gamma + cfg.sigma_v * normal(rng);
      x(0, i) = state;
    }
  }

  LearningObservations obs;
  if (cfg.binary) obs.success.emplace(n);
  if (cfg.reaction) obs.reaction.emplace(n);
  if (cfg.spikes) obs.spikes.emplace(Eigen::MatrixXi::Zero(cfg.bins, n));

  const LearningParams& pp = cfg.params;
  const Index m = static_cast<Index>(pp.c.size());
  Index clipped = 0;
  for (Index i = 0; i < n; ++i) {
    if (cfg.binary)
      (*obs.success)(i) = uniform(rng) < logistic(pp.nu + pp.eta * x(0, i)) ? 1 : 0;
    if (cfg.reaction)
      (*obs.reaction)(i) = pp.psi + pp.omega * x(0, i) + pp.sigma_r * normal(rng);
    if (cfg.spikes) {
      auto& s = *obs.spikes;
      for (Index j = 0; j < cfg.bins; ++j) {
        double log_rate = pp.xi + pp.a * x(0, i);
        for (Index mm = 1; mm <= m; ++mm)
          if (j - mm >= 0) log_rate += pp.c[mm - 1] * s(j - mm, i);
        const double prob = std::exp(log_rate) * pp.dt;
        if (prob > 1.0) ++clipped;
        s(j, i) = uniform(rng) < std::min(prob, 1.0) ? 1 : 0;
      }
    }
  }
  return LearningSim{LatentSeries(std::move(x)), std::move(obs), clipped};
}

void SpectroConfig::validate() const {
  if (k < 2 || k % 2 != 0) throw ConfigError("k must be even and >= 2");
  if (p < 1) throw ConfigError("p must be >= 1");
  if (n < 1) throw ConfigError("n must be >= 1");
  if (!(fs > 0.0)) throw ConfigError("fs must be > 0");
  if (!(noise_sd >= 0.0)) throw ConfigError("noise_sd must be >= 0");
  if (!std::isfinite(f0) || !std::isfinite(f1) || !std::isfinite(f2) || !std::isfinite(amp))
    throw ConfigError("signal parameters must be finite");
}

std::vector<Matrix> fourier_windows(const SpectroConfig& cfg) {
  cfg.validate();
  std::vector<Matrix> f;
  f.reserve(static_cast<std::size_t>(cfg.n));
  for (Index win = 0; win < cfg.n; ++win) {
    Matrix fn(cfg.p, cfg.k);
    for (Index r = 0; r < cfg.p; ++r) {
      const std::int64_t m = static_cast<std::int64_t>(win) * cfg.p + r + 1;
      for (Index j = 0; j < cfg.k; ++j) {
        // Argument 2 pi m j / K with the integer product reduced mod K first,
        // which is exact and keeps the evaluation accurate for large m.
        const std::int64_t mj = m * static_cast<std::int64_t>(j);
        const double arg = kTwoPi * static_cast<double>(mj % cfg.k) / static_cast<double>(cfg.k);
        fn(r, j) = j < cfg.k / 2 ? std::cos(arg) : std::sin(arg);
      }
    }
    f.push_back(std::move(fn));
  }
  return f;
}

Vector simulate_spectro_signal(const SpectroConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Index total = cfg.samples();
  Vector y(total);
  for (Index i = 0; i < total; ++i) {
    const double m = static_cast<double>(i + 1);
    const double t = m / cfg.fs;
    const double env = std::pow(std::cos(kTwoPi * cfg.f0 * t), 8.0);
    const double grow = std::exp(4.0 * (m - static_cast<double>(total)) / static_cast<double>(total));
    y(i) = cfg.amp * env * std::sin(kTwoPi * cfg.f1 * t) +
           cfg.amp * grow * std::cos(kTwoPi * cfg.f2 * t) + cfg.noise_sd * normal(rng);
  }
  return y;
}

Matrix reshape_windows(const Vector& series, Index p, Index n) {
  if (series.size() != p * n)
    throw ShapeError("series length " + std::to_string(series.size()) + " is not " +
                     std::to_string(p) + " * " + std::to_string(n));
  return Eigen::Map<const Matrix>(series.data(), p, n);
}

LinearGaussianMeasurement spectro_measurement(const SpectroConfig& cfg, const Vector& series) {
  return LinearGaussianMeasurement(fourier_windows(cfg), reshape_windows(series, cfg.p, cfg.n));
}

Matrix band_power(const Matrix& coeffs) {
  const Index k = coeffs.rows();
  if (k < 2 || k % 2 != 0) throw ShapeError("coefficient matrix must have even row count >= 2");
  Matrix power(k / 2, coeffs.cols());
  for (Index n = 0; n < coeffs.cols(); ++n) {
    power(0, n) = coeffs(0, n) * coeffs(0, n);
    for (Index row = 1; row < k / 2; ++row)
      power(row, n) =
          coeffs(row, n) * coeffs(row, n) + coeffs(k - row, n) * coeffs(k - row, n);
  }
  return power;
}

double bin_frequency(Index row, Index k, double fs) {
  return static_cast<double>(row) * fs / static_cast<double>(k);
}

double rmse(const LatentSeries& estimate, const LatentSeries& truth) {
  if (!estimate.same_shape(truth)) throw ShapeError("rmse arguments must have equal shapes");
  const std::size_t len = static_cast<std::size_t>(estimate.values().size());
  const double ss = kernels::sum_sq_diff(estimate.values().data(), truth.values().data(), len);
  return std::sqrt(ss / static_cast<double>(estimate.length()));
}

LatentSeries quadratic_map_oracle(const LinearGaussianMeasurement& meas,
                                  const GaussianPrior& prior, const TransitionModel& t,
                                  double beta) {
  const Index k = meas.state_dim();
  const Index n = meas.length();
  const Index kn = k * n;

  Matrix g = Matrix::Zero(kn, kn);
  for (Index i = 0; i < n; ++i) {
    g.block(i * k, i * k, k, k) = Matrix::Identity(k, k);
    if (i > 0) g.block(i * k, (i - 1) * k, k, k) = -t.d();
  }

  Matrix h = Matrix::Zero(kn, kn);
  Vector rhs = Vector::Zero(kn);
  for (Index i = 0; i < n; ++i) {
    const Matrix& f = meas.regressor(i);
    h.block(i * k, i * k, k, k) += 2.0 * f.transpose() * f;
    rhs.segment(i * k, k) += 2.0 * f.transpose() * meas.observations().col(i);
  }
  const double c = beta / (prior.sigma_v() * prior.sigma_v());
  h += c * g.transpose() * g;
  rhs += c * prior.gamma() * g.transpose() * Vector::Ones(kn);

  const Vector x = h.ldlt().solve(rhs);
  return LatentSeries(Eigen::Map<const Matrix>(x.data(), k, n));
}

LatentSeries grid_map_oracle(const MeasurementModel& meas, const SystemPrior& prior,
                             const TransitionModel& t, double beta, double lo, double hi,
                             double tol) {
  const Index k = meas.state_dim();
  const Index n = meas.length();
  const Index dim = k * n;
  if (dim > 6) throw ConfigError("grid oracle supports at most 6 free coordinates");
  if (!(hi > lo)) throw ConfigError("grid oracle needs hi > lo");

  Matrix pt(k, n);
  Matrix w;
  auto eval = [&](const Vector& v) {
    for (Index d = 0; d < dim; ++d) pt(d % k, d / k) = v(d);
    double total = 0.0;
    for (Index i = 0; i < n; ++i) total += meas.nll(i, pt.col(i));
    detail::transition_into(pt, t.d(), w);
    return total + beta * prior.phi(w);
  };

  constexpr int kPoints = 13;
  Vector center = Vector::Constant(dim, 0.5 * (lo + hi));
  double radius = 0.5 * (hi - lo);
  Vector best = center;
  double best_val = std::numeric_limits<double>::infinity();

  while (true) {
    const double step = 2.0 * radius / (kPoints - 1);
    std::vector<int> digit(static_cast<std::size_t>(dim), 0);
    Vector v(dim);
    while (true) {
      for (Index d = 0; d < dim; ++d)
        v(d) = center(d) - radius + step * digit[static_cast<std::size_t>(d)];
      const double val = eval(v);
      if (val < best_val) {
        best_val = val;
        best = v;
      }
      Index d = 0;
      while (d < dim && ++digit[static_cast<std::size_t>(d)] == kPoints) {
        digit[static_cast<std::size_t>(d)] = 0;
        ++d;
      }
      if (d == dim) break;
    }
    if (step <= tol) break;
    center = best;
    radius = 3.0 * step;
  }

  Matrix out(k, n);
  for (Index d = 0; d < dim; ++d) out(d % k, d / k) = best(d);
  return LatentSeries(std::move(out));
}

}  // namespace modmap
