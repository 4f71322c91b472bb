#include "modmap/admm.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>
#include <vector>

#include "modmap/kernels.hpp"

namespace modmap {

AdmmState AdmmState::zero(Index k, Index n) {
  return AdmmState{LatentSeries::zero(k, n), LatentSeries::zero(k, n), LatentSeries::zero(k, n),
                   LatentSeries::zero(k, n), LatentSeries::zero(k, n), 0};
}

namespace {

std::size_t flat_size(const Matrix& m) { return static_cast<std::size_t>(m.size()); }

int effective_threads(int threads, Index n) {
  if (threads <= 0) {
    const unsigned hc = std::thread::hardware_concurrency();
    threads = hc == 0 ? 1 : static_cast<int>(hc);
  }
  return static_cast<int>(std::min<Index>(threads, n));
}

// Per-column prox fan-out; columns are disjoint and apply() is pure, so the
// result is identical for every thread count.
void x_update(const MeasurementProx& prox, const Matrix& x_tilde, Matrix& x, int threads) {
  const Index n = x_tilde.cols();
  const int nt = effective_threads(threads, n);
  if (nt <= 1) {
    for (Index i = 0; i < n; ++i) x.col(i) = prox.apply(i, x_tilde.col(i));
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(nt));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(nt));
  for (int tid = 0; tid < nt; ++tid) {
    const Index lo = n * tid / nt;
    const Index hi = n * (tid + 1) / nt;
    pool.emplace_back([&, tid, lo, hi] {
      try {
        for (Index i = lo; i < hi; ++i) x.col(i) = prox.apply(i, x_tilde.col(i));
      } catch (...) {
        errors[static_cast<std::size_t>(tid)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct Iterates {
  Matrix x, w, z, lambda, alpha;
};

void sweep(Iterates& s, const MeasurementProx& prox, const SystemPrior& prior,
           const ConsensusSolver& consensus, double rho, double beta, int threads, Matrix& tmp_a,
           Matrix& tmp_b) {
  const Matrix& d = consensus.transition_matrix();
  const double inv_rho = 1.0 / rho;
  const std::size_t len = flat_size(s.x);

  tmp_a = s.z - inv_rho * s.lambda;
  x_update(prox, tmp_a, s.x, threads);

  detail::transition_into(s.z, d, tmp_b);
  tmp_a = tmp_b - inv_rho * s.alpha;
  s.w = prior.prox(tmp_a, beta, rho);

  tmp_a = s.x + inv_rho * s.lambda;
  tmp_b = s.w + inv_rho * s.alpha;
  s.z = consensus.solve(tmp_a, tmp_b);

  kernels::dual_ascent(s.lambda.data(), s.x.data(), s.z.data(), len, rho);
  detail::transition_into(s.z, d, tmp_b);
  kernels::dual_ascent(s.alpha.data(), s.w.data(), tmp_b.data(), len, rho);
}

ResidualNorms residual_norms(const Iterates& s, const Matrix& w_prev, const Matrix& z_prev,
                             const Matrix& d, double rho, Matrix& tmp_a, Matrix& tmp_b) {
  const std::size_t len = flat_size(s.x);
  ResidualNorms r{};
  r.r1 = std::sqrt(kernels::sum_sq_diff(s.x.data(), s.z.data(), len));
  detail::transition_into(s.z, d, tmp_a);
  r.r2 = std::sqrt(kernels::sum_sq_diff(s.w.data(), tmp_a.data(), len));
  tmp_a = s.w - w_prev;
  detail::transition_adjoint_into(tmp_a, d, tmp_b);
  r.s1 = rho * std::sqrt(kernels::sum_sq(tmp_b.data(), len));
  r.s2 = rho * std::sqrt(kernels::sum_sq_diff(s.z.data(), z_prev.data(), len));
  return r;
}

Thresholds threshold_values(const Iterates& s, const Matrix& d, const AdmmConfig& cfg,
                            Matrix& tmp) {
  const std::size_t len = flat_size(s.x);
  const double floor = cfg.eps_abs * std::sqrt(static_cast<double>(len));
  auto norm_of = [len](const Matrix& m) { return std::sqrt(kernels::sum_sq(m.data(), len)); };
  Thresholds t{};
  t.eps1_pri = cfg.eps_rel * std::max(norm_of(s.x), norm_of(s.z)) + floor;
  detail::transition_into(s.z, d, tmp);
  t.eps2_pri = cfg.eps_rel * std::max(norm_of(s.w), norm_of(tmp)) + floor;
  t.eps1_dual = cfg.eps_rel * norm_of(s.lambda) + floor;
  t.eps2_dual = cfg.eps_rel * norm_of(s.alpha) + floor;
  return t;
}

Iterates iterates_of(const AdmmState& s) {
  return Iterates{s.x.values(), s.w.values(), s.z.values(), s.lambda.values(), s.alpha.values()};
}

void check_state_shape(const AdmmState& s, Index k, Index n) {
  for (const LatentSeries* part : {&s.x, &s.w, &s.z, &s.lambda, &s.alpha})
    if (part->state_dim() != k || part->length() != n)
      throw ShapeError("state iterate is not " + std::to_string(k) + " x " + std::to_string(n));
}

bool all_finite(const Iterates& s) {
  return s.x.allFinite() && s.w.allFinite() && s.z.allFinite() && s.lambda.allFinite() &&
         s.alpha.allFinite();
}

}  // namespace

AdmmState admm_step(const AdmmState& state, const MeasurementProx& prox, const SystemPrior& prior,
                    const ConsensusSolver& consensus, const AdmmConfig& cfg, int threads) {
  cfg.validate();
  check_state_shape(state, consensus.state_dim(), consensus.length());
  Iterates s = iterates_of(state);
  Matrix tmp_a, tmp_b;
  sweep(s, prox, prior, consensus, cfg.rho, cfg.beta, threads, tmp_a, tmp_b);
  return AdmmState{LatentSeries(std::move(s.x)), LatentSeries(std::move(s.w)),
                   LatentSeries(std::move(s.z)), LatentSeries(std::move(s.lambda)),
                   LatentSeries(std::move(s.alpha)), state.iteration + 1};
}

AdmmState admm_step(const AdmmState& state, const MeasurementModel& meas,
                    const SystemPrior& prior, const ConsensusSolver& consensus,
                    const AdmmConfig& cfg) {
  return admm_step(state, *meas.prox_operator(cfg.rho), prior, consensus, cfg);
}

ResidualNorms admm_residuals(const AdmmState& prev, const AdmmState& next,
                             const TransitionModel& t, double rho) {
  if (!prev.x.same_shape(next.x)) throw ShapeError("residuals need equal-shape states");
  Iterates s = iterates_of(next);
  Matrix tmp_a, tmp_b;
  return residual_norms(s, prev.w.values(), prev.z.values(), t.d(), rho, tmp_a, tmp_b);
}

Thresholds admm_thresholds(const AdmmState& s, const TransitionModel& t, const AdmmConfig& cfg) {
  Iterates it = iterates_of(s);
  Matrix tmp;
  return threshold_values(it, t.d(), cfg, tmp);
}

AdmmResult admm_run(const MeasurementModel& meas, const SystemPrior& prior,
                    const ConsensusSolver& consensus, const AdmmConfig& cfg,
                    std::optional<AdmmState> init, int threads) {
  cfg.validate();
  const Index k = meas.state_dim();
  const Index n = meas.length();
  if (consensus.state_dim() != k || consensus.length() != n)
    throw ShapeError("consensus solver shape does not match the measurement model");

  Iterates s;
  if (init) {
    check_state_shape(*init, k, n);
    s = iterates_of(*init);
  } else {
    s = Iterates{Matrix::Zero(k, n), Matrix::Zero(k, n), Matrix::Zero(k, n), Matrix::Zero(k, n),
                 Matrix::Zero(k, n)};
  }

  const auto prox = meas.prox_operator(cfg.rho);
  const TransitionModel t(consensus.transition_matrix());
  AdmmReport report;
  report.trace.reserve(static_cast<std::size_t>(cfg.max_iter));
  Matrix w_prev, z_prev, tmp_a, tmp_b;

  for (int it = 1; it <= cfg.max_iter; ++it) {
    w_prev = s.w;
    z_prev = s.z;
    try {
      sweep(s, *prox, prior, consensus, cfg.rho, cfg.beta, threads, tmp_a, tmp_b);
    } catch (const std::exception& e) {
      throw AdmmAbort(std::string("sub-update failed at iteration ") + std::to_string(it) + ": " +
                          e.what(),
                      it, report);
    }
    if (!all_finite(s))
      throw AdmmAbort("non-finite iterate at iteration " + std::to_string(it), it, report);

    const ResidualNorms rn = residual_norms(s, w_prev, z_prev, t.d(), cfg.rho, tmp_a, tmp_b);
    const Thresholds th = threshold_values(s, t.d(), cfg, tmp_a);
    double obj;
    try {
      obj = objective(LatentSeries(s.x), meas, prior, t, cfg.beta);
    } catch (const std::exception& e) {
      throw AdmmAbort(std::string("objective evaluation failed at iteration ") +
                          std::to_string(it) + ": " + e.what(),
                      it, report);
    }
    report.trace.push_back({it, rn.r1, rn.r2, rn.s1, rn.s2, th.eps1_pri, th.eps2_pri, th.eps1_dual,
                            th.eps2_dual, obj});
    report.iterations = it;
    if (rn.r1 <= th.eps1_pri && rn.r2 <= th.eps2_pri && rn.s1 <= th.eps1_dual &&
        rn.s2 <= th.eps2_dual) {
      report.converged = true;
      break;
    }
  }

  AdmmState final_state{LatentSeries(s.x), LatentSeries(std::move(s.w)),
                        LatentSeries(std::move(s.z)), LatentSeries(std::move(s.lambda)),
                        LatentSeries(std::move(s.alpha)), report.iterations};
  return AdmmResult{final_state.x, std::move(report), std::move(final_state)};
}

}  // namespace modmap
