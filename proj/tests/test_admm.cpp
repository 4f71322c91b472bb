#include <doctest.h>

#include <cmath>
#include <random>

#include "modmap/admm.hpp"

using namespace modmap;

namespace {

Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m(i) = dist(rng);
  return m;
}

struct Problem {
  LinearGaussianMeasurement meas;
  GaussianPrior prior;
  TransitionModel transition;
  ConsensusSolver consensus;
};

Problem make_problem(Index k, Index n, std::mt19937_64& rng) {
  Matrix f = random_matrix(k + 1, k, rng);
  Matrix y = random_matrix(k + 1, n, rng);
  TransitionModel t(random_matrix(k, k, rng, 0.6));
  return Problem{LinearGaussianMeasurement(std::move(f), std::move(y)),
                 GaussianPrior(0.1, 0.7), t, ConsensusSolver(t, n)};
}

// The five updates written directly against the definitions, with no shared
// code beyond the prox/consensus objects.
AdmmState reference_step(const AdmmState& s, const MeasurementProx& prox,
                         const SystemPrior& prior, const ConsensusSolver& consensus,
                         const TransitionModel& t, const AdmmConfig& cfg) {
  const double rho = cfg.rho;
  const Index k = s.z.state_dim(), n = s.z.length();

  Matrix x(k, n);
  for (Index j = 0; j < n; ++j)
    x.col(j) = prox.apply(j, Vector(s.z.col(j) - s.lambda.col(j) / rho));

  const Matrix az = apply_transition(s.z, t).values();
  const Matrix w = prior.prox(az - s.alpha.values() / rho, cfg.beta, rho);

  const Matrix zx = x + s.lambda.values() / rho;
  const Matrix zw = w + s.alpha.values() / rho;
  const Matrix z = consensus.solve(zx, zw);

  const Matrix az_next = apply_transition(LatentSeries(z), t).values();
  AdmmState next;
  next.x = LatentSeries(x);
  next.w = LatentSeries(w);
  next.z = LatentSeries(z);
  next.lambda = LatentSeries(Matrix(s.lambda.values() + rho * (x - z)));
  next.alpha = LatentSeries(Matrix(s.alpha.values() + rho * (w - az_next)));
  next.iteration = s.iteration + 1;
  return next;
}

}  // namespace

TEST_CASE("solver sweep matches the hand-rolled reference for five iterations") {
  std::mt19937_64 rng(51);
  const Index k = 2, n = 6;
  Problem p = make_problem(k, n, rng);
  AdmmConfig cfg;
  cfg.rho = 2.5;
  cfg.beta = 1.3;

  const auto prox = p.meas.prox_operator(cfg.rho);
  AdmmState fast = AdmmState::zero(k, n);
  AdmmState slow = AdmmState::zero(k, n);
  for (int it = 0; it < 5; ++it) {
    fast = admm_step(fast, *prox, p.prior, p.consensus, cfg);
    slow = reference_step(slow, *prox, p.prior, p.consensus, p.transition, cfg);
    CHECK((fast.x.values() - slow.x.values()).lpNorm<Eigen::Infinity>() <= 1e-12);
    CHECK((fast.w.values() - slow.w.values()).lpNorm<Eigen::Infinity>() <= 1e-12);
    CHECK((fast.z.values() - slow.z.values()).lpNorm<Eigen::Infinity>() <= 1e-12);
    CHECK((fast.lambda.values() - slow.lambda.values()).lpNorm<Eigen::Infinity>() <= 1e-12);
    CHECK((fast.alpha.values() - slow.alpha.values()).lpNorm<Eigen::Infinity>() <= 1e-12);
  }
}

TEST_CASE("residual and threshold values match their formulas") {
  std::mt19937_64 rng(53);
  const Index k = 2, n = 5;
  Problem p = make_problem(k, n, rng);
  AdmmConfig cfg;
  cfg.rho = 1.7;

  const auto prox = p.meas.prox_operator(cfg.rho);
  AdmmState prev = AdmmState::zero(k, n);
  for (int it = 0; it < 3; ++it) prev = admm_step(prev, *prox, p.prior, p.consensus, cfg);
  const AdmmState next = admm_step(prev, *prox, p.prior, p.consensus, cfg);

  const ResidualNorms r = admm_residuals(prev, next, p.transition, cfg.rho);
  const Matrix az = apply_transition(next.z, p.transition).values();
  CHECK(r.r1 == doctest::Approx((next.x.values() - next.z.values()).norm()).epsilon(1e-12));
  CHECK(r.r2 == doctest::Approx((next.w.values() - az).norm()).epsilon(1e-12));
  const Matrix dw = next.w.values() - prev.w.values();
  const double s1 =
      cfg.rho * apply_transition_adjoint(LatentSeries(dw), p.transition).values().norm();
  CHECK(r.s1 == doctest::Approx(s1).epsilon(1e-12));
  CHECK(r.s2 ==
        doctest::Approx(cfg.rho * (next.z.values() - prev.z.values()).norm()).epsilon(1e-12));

  const Thresholds eps = admm_thresholds(next, p.transition, cfg);
  const double root_kn = std::sqrt(double(k) * double(n));
  CHECK(eps.eps1_pri ==
        doctest::Approx(cfg.eps_rel * std::max(next.x.values().norm(), next.z.values().norm()) +
                        cfg.eps_abs * root_kn)
            .epsilon(1e-12));
  CHECK(eps.eps2_pri ==
        doctest::Approx(cfg.eps_rel * std::max(next.w.values().norm(), az.norm()) +
                        cfg.eps_abs * root_kn)
            .epsilon(1e-12));
  CHECK(eps.eps1_dual ==
        doctest::Approx(cfg.eps_rel * next.lambda.values().norm() + cfg.eps_abs * root_kn)
            .epsilon(1e-12));
  CHECK(eps.eps2_dual ==
        doctest::Approx(cfg.eps_rel * next.alpha.values().norm() + cfg.eps_abs * root_kn)
            .epsilon(1e-12));
  CHECK(eps.eps1_pri > 0.0);
  CHECK(eps.eps2_pri > 0.0);
  CHECK(eps.eps1_dual > 0.0);
  CHECK(eps.eps2_dual > 0.0);
}

TEST_CASE("run converges on a small quadratic problem") {
  std::mt19937_64 rng(57);
  Problem p = make_problem(2, 8, rng);
  AdmmConfig cfg;
  cfg.rho = 1.0;
  cfg.eps_rel = 1e-9;
  cfg.eps_abs = 1e-11;
  cfg.max_iter = 5000;

  const AdmmResult res = admm_run(p.meas, p.prior, p.consensus, cfg);
  CHECK(res.report.converged);
  CHECK(res.report.iterations == int(res.report.trace.size()));
  const IterationRecord& last = res.report.trace.back();
  CHECK(last.r1 <= last.eps1_pri);
  CHECK(last.r2 <= last.eps2_pri);
  CHECK(last.s1 <= last.eps1_dual);
  CHECK(last.s2 <= last.eps2_dual);

  // At the fixed point, x, z, and the inverse-transitioned w all agree.
  CHECK((res.state.x.values() - res.state.z.values()).norm() <= 1e-6);
  const Matrix az = apply_transition(res.state.z, p.transition).values();
  CHECK((res.state.w.values() - az).norm() <= 1e-6);
}

TEST_CASE("a single sweep reports not converged on a non-trivial instance") {
  std::mt19937_64 rng(59);
  Problem p = make_problem(1, 4, rng);
  AdmmConfig cfg;
  cfg.max_iter = 1;
  const AdmmResult res = admm_run(p.meas, p.prior, p.consensus, cfg);
  CHECK_FALSE(res.report.converged);
  CHECK(res.report.iterations == 1);
  CHECK(res.report.trace.size() == 1);
}

TEST_CASE("result is bitwise-identical for any thread count") {
  std::mt19937_64 rng(61);
  Problem p = make_problem(3, 17, rng);
  AdmmConfig cfg;
  cfg.rho = 2.0;
  cfg.max_iter = 25;

  const AdmmResult one = admm_run(p.meas, p.prior, p.consensus, cfg, std::nullopt, 1);
  const AdmmResult three = admm_run(p.meas, p.prior, p.consensus, cfg, std::nullopt, 3);
  const AdmmResult automatic = admm_run(p.meas, p.prior, p.consensus, cfg, std::nullopt, 0);
  CHECK((one.estimate.values() - three.estimate.values()).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((one.estimate.values() - automatic.estimate.values()).lpNorm<Eigen::Infinity>() == 0.0);
  for (std::size_t i = 0; i < one.report.trace.size(); ++i) {
    CHECK(one.report.trace[i].r1 == three.report.trace[i].r1);
    CHECK(one.report.trace[i].objective == three.report.trace[i].objective);
  }
}

TEST_CASE("warm start resumes from the supplied state") {
  std::mt19937_64 rng(63);
  Problem p = make_problem(2, 6, rng);
  AdmmConfig cfg;
  cfg.max_iter = 10;

  const AdmmResult cold = admm_run(p.meas, p.prior, p.consensus, cfg);
  AdmmConfig more = cfg;
  more.max_iter = 5;
  const AdmmResult part = admm_run(p.meas, p.prior, p.consensus, more);
  const AdmmResult rest = admm_run(p.meas, p.prior, p.consensus, more, part.state);
  CHECK((rest.estimate.values() - cold.estimate.values()).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("shape mismatches between modules are rejected") {
  std::mt19937_64 rng(65);
  Problem p = make_problem(2, 6, rng);
  const ConsensusSolver wrong(p.transition, 7);
  AdmmConfig cfg;
  CHECK_THROWS_AS(admm_run(p.meas, p.prior, wrong, cfg), ShapeError);
}
