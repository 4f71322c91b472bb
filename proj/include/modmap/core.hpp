#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace modmap {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Shape/domain violations detected when objects are built or combined.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Invalid solver or experiment configuration.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Non-finite value produced where a finite one is required; `index` is the
// offending time index (or -1 when no single index applies).
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what, Index index = -1)
      : std::runtime_error(what), index(index) {}
  Index index;
};

// An iterative sub-solver failed to reach its tolerance.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// K x N latent series; column n is the K-dimensional state at time n.
// Immutable after construction; every entry is validated finite.
class LatentSeries {
 public:
  LatentSeries() = default;
  explicit LatentSeries(Matrix values);
  static LatentSeries zero(Index k, Index n);

  Index state_dim() const { return values_.rows(); }
  Index length() const { return values_.cols(); }
  const Matrix& values() const { return values_; }
  Vector col(Index n) const { return values_.col(n); }
  bool same_shape(const LatentSeries& other) const {
    return state_dim() == other.state_dim() && length() == other.length();
  }

 private:
  Matrix values_;
};

// State transition x_n -> D x_n. D is K x K, finite, otherwise unrestricted.
class TransitionModel {
 public:
  explicit TransitionModel(Matrix d);
  static TransitionModel scalar(double kappa);
  static TransitionModel identity(Index k);

  Index state_dim() const { return d_.rows(); }
  const Matrix& d() const { return d_; }

 private:
  Matrix d_;
};

struct AdmmConfig {
  double rho = 1.0;
  double beta = 1.0;
  double eps_rel = 1e-6;
  double eps_abs = 1e-8;
  int max_iter = 1000;
  std::uint64_t seed = 0;

  void validate() const;  // throws ConfigError naming the offending field
};

// w_1 = x_1, w_n = x_n - D x_{n-1}: the map whose output the system prior
// penalizes. Invertible by forward recursion x_n = w_n + D x_{n-1}.
LatentSeries apply_transition(const LatentSeries& x, const TransitionModel& t);

// Adjoint under the Frobenius inner product:
// out_n = a_n - D^T a_{n+1} for n < N, out_N = a_N.
LatentSeries apply_transition_adjoint(const LatentSeries& a, const TransitionModel& t);

// Inverse of apply_transition (forward recursion).
LatentSeries invert_transition(const LatentSeries& w, const TransitionModel& t);

namespace detail {
// Matrix-level versions used inside solver loops (no wrapping/validation).
void transition_into(const Matrix& x, const Matrix& d, Matrix& out);
void transition_adjoint_into(const Matrix& a, const Matrix& d, Matrix& out);
}  // namespace detail

class MeasurementModel;
class SystemPrior;

// Full MAP objective: sum_n nll(n, x_n) + beta * phi(apply_transition(x)).
// Throws NumericError (with the offending n) if any term is non-finite.
double objective(const LatentSeries& x, const MeasurementModel& meas, const SystemPrior& prior,
                 const TransitionModel& t, double beta);

}  // namespace modmap
