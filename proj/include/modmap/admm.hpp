#pragma once

#include <optional>
#include <vector>

#include "modmap/consensus.hpp"
#include "modmap/core.hpp"
#include "modmap/measurement.hpp"
#include "modmap/priors.hpp"

namespace modmap {

struct AdmmState {
  LatentSeries x, w, z, lambda, alpha;
  int iteration = 0;

  static AdmmState zero(Index k, Index n);
};

struct ResidualNorms {
  double r1, r2, s1, s2;
};

struct Thresholds {
  double eps1_pri, eps2_pri, eps1_dual, eps2_dual;
};

struct IterationRecord {
  int iter;
  double r1, r2, s1, s2;
  double eps1_pri, eps2_pri, eps1_dual, eps2_dual;
  double objective;
};

struct AdmmReport {
  std::vector<IterationRecord> trace;
  bool converged = false;
  int iterations = 0;
};

// A sub-update or objective evaluation failed mid-run; carries the iteration
// that failed and the trace recorded before it.
struct AdmmAbort : std::runtime_error {
  AdmmAbort(const std::string& what, int iteration, AdmmReport partial)
      : std::runtime_error(what), iteration(iteration), partial(std::move(partial)) {}
  int iteration;
  AdmmReport partial;
};

struct AdmmResult {
  LatentSeries estimate;  // the x iterate at termination
  AdmmReport report;
  AdmmState state;
};

// One sweep of the five updates, in order:
//   x_n  <- meas prox at z_n - lambda_n / rho
//   w    <- prior prox at A(z) - alpha / rho
//   z    <- consensus solve of (x + lambda/rho, w + alpha/rho)
//   lambda <- lambda + rho (x - z)
//   alpha  <- alpha + rho (w - A(z))
// x and w read only the previous z, lambda, alpha; threads > 1 fans the
// x-update out across time indices (identical results for any thread count).
AdmmState admm_step(const AdmmState& state, const MeasurementProx& prox, const SystemPrior& prior,
                    const ConsensusSolver& consensus, const AdmmConfig& cfg, int threads = 1);
AdmmState admm_step(const AdmmState& state, const MeasurementModel& meas,
                    const SystemPrior& prior, const ConsensusSolver& consensus,
                    const AdmmConfig& cfg);

// Norms of the two primal residuals (x - z, w - A(z)) of `next` and the two
// dual residuals rho * adjoint(w - w_prev), rho * (z - z_prev).
ResidualNorms admm_residuals(const AdmmState& prev, const AdmmState& next,
                             const TransitionModel& t, double rho);

// eps_rel * max of the paired iterate norms + eps_abs * sqrt(K N) for the
// primal pair; eps_rel * dual-variable norm + eps_abs * sqrt(K N) for duals.
Thresholds admm_thresholds(const AdmmState& s, const TransitionModel& t, const AdmmConfig& cfg);

// Runs from zeros (or `init`) until all four residual norms fall below their
// thresholds or max_iter sweeps complete; convergence on the final permitted
// sweep still counts as converged. Throws AdmmAbort on numeric failure.
AdmmResult admm_run(const MeasurementModel& meas, const SystemPrior& prior,
                    const ConsensusSolver& consensus, const AdmmConfig& cfg,
                    std::optional<AdmmState> init = std::nullopt, int threads = 1);

}  // namespace modmap
