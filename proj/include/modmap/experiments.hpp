#pragma once

#include <cstdint>
#include <vector>

#include "modmap/core.hpp"
#include "modmap/measurement.hpp"
#include "modmap/priors.hpp"

namespace modmap {

// Scalar-state learning simulation. Gaussian dynamics draw
// x_1 ~ N(gamma, sigma_v^2), x_n = kappa x_{n-1} + gamma + N(0, sigma_v^2);
// the sparse variant starts from 0 and adds increments that are 0 with
// probability p and sigma * (chi-squared, 2 dof) otherwise.
struct LearningSimConfig {
  Index trials = 25;
  double kappa = 1.0;
  double gamma = 0.05;
  double sigma_v = 0.1;
  bool sparse = false;
  double p = 0.9;     // sparse: probability of a zero increment
  double sigma = 0.1; // sparse: increment scale
  bool binary = true;
  bool reaction = true;
  bool spikes = true;
  Index bins = 50;  // spike bins per trial
  LearningParams params;
  std::uint64_t seed = 0;

  void validate() const;
};

struct LearningSim {
  LatentSeries x_true;
  LearningObservations obs;
  Index clipped_bins = 0;  // spike bins whose rate * dt exceeded 1
};

// Fixed draw order for a given seed: the full state path, then per trial the
// binary outcome, the reaction time, and the spike bins in ascending order.
LearningSim simulate_learning(const LearningSimConfig& cfg);

struct SpectroConfig {
  Index k = 250;  // coefficient count, even
  Index p = 30;   // samples per window
  Index n = 250;  // windows
  double fs = 125.0;
  double f0 = 0.04;
  double f1 = 10.0;
  double f2 = 11.0;
  double amp = 10.0;
  double noise_sd = 1.0;
  std::uint64_t seed = 0;

  Index samples() const { return p * n; }
  void validate() const;
};

// N regressors, each P x K. Window n (1-based), sample p (1-based), global
// sample index m = (n-1)P + p; column k (1-based) holds cos(2 pi m (k-1)/K)
// for k <= K/2 and sin(2 pi m (k-1+K/2)/K) above. For integer m the sine
// block equals (-1)^m sin(2 pi m (k-1)/K): column K/2+1 vanishes and the
// sine partner of cos bin k (0-based) is column K-k.
std::vector<Matrix> fourier_windows(const SpectroConfig& cfg);

// Amplitude-modulated f1 sine plus exponentially growing f2 cosine plus
// N(0, noise_sd^2) noise, sampled at t = m / fs for m = 1..M.
Vector simulate_spectro_signal(const SpectroConfig& cfg);

// Splits a length-P*N series into the P x N window matrix (column n holds
// window n's samples).
Matrix reshape_windows(const Vector& series, Index p, Index n);

LinearGaussianMeasurement spectro_measurement(const SpectroConfig& cfg, const Vector& series);

// (K/2) x N per-bin power. Row 0 is the squared DC coefficient; row k pairs
// cos coefficient k with its aliased sine partner at coefficient K-k.
Matrix band_power(const Matrix& coeffs);

// Frequency in Hz represented by power row `row` (and cos coefficient row).
double bin_frequency(Index row, Index k, double fs);

// Frobenius error over sqrt(length): sqrt(sum (a - b)^2 / N).
double rmse(const LatentSeries& estimate, const LatentSeries& truth);

// Exact MAP for linear-Gaussian measurements under the Gaussian increments
// prior: assembles the stacked KN x KN normal equations (with an explicitly
// built transition stack, independent of the solver path) and solves densely.
LatentSeries quadratic_map_oracle(const LinearGaussianMeasurement& meas,
                                  const GaussianPrior& prior, const TransitionModel& t,
                                  double beta);

// Exhaustive multiscale grid minimizer of the full MAP objective over
// [lo, hi] per coordinate, for problems with at most 6 free coordinates.
// The box shrinks around the incumbent with a three-cell margin until the
// per-coordinate step drops below tol; valid for convex objectives.
LatentSeries grid_map_oracle(const MeasurementModel& meas, const SystemPrior& prior,
                             const TransitionModel& t, double beta, double lo, double hi,
                             double tol = 1e-5);

}  // namespace modmap
