#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "modmap/consensus.hpp"

using namespace modmap;

namespace {

Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng, double scale = 1.5) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m(i) = dist(rng);
  return m;
}

// Reference solve through the dense KN x KN normal equations.
Matrix dense_solve(const TransitionModel& t, const Matrix& zx, const Matrix& zw) {
  const Index k = t.state_dim(), n = zx.cols();
  const Matrix m = ConsensusSolver::dense_system(t, n);

  // G^T zw with G the block map w_1 = x_1, w_j = x_j - D x_{j-1}.
  Matrix gtw = zw;
  gtw.leftCols(n - 1) -= t.d().transpose() * zw.rightCols(n - 1);

  Vector rhs(k * n);
  for (Index j = 0; j < n; ++j) rhs.segment(j * k, k) = zx.col(j) + gtw.col(j);
  const Vector sol = m.ldlt().solve(rhs);
  Matrix out(k, n);
  for (Index j = 0; j < n; ++j) out.col(j) = sol.segment(j * k, k);
  return out;
}

}  //  namespace

TEST_CASE("block solver matches the dense system on random instances") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const Index k = 1 + static_cast<Index>(rng() % 3);
    const Index n = 1 + static_cast<Index>(rng() % 12);
    const TransitionModel t(random_matrix(k, k, rng));
    const ConsensusSolver solver(t, n);
    const Matrix zx = random_matrix(k, n, rng);
    const Matrix zw = random_matrix(k, n, rng);
    const Matrix fast = solver.solve(zx, zw);
    const Matrix slow = dense_solve(t, zx, zw);
    CHECK((fast - slow).lpNorm<Eigen::Infinity>() <= 1e-9);
  }
}

TEST_CASE("scalar chain with D = 0.4 matches the dense solve") {
  const TransitionModel t = TransitionModel::scalar(0.4);
  const ConsensusSolver solver(t, 4);
  Matrix zx(1, 4), zw(1, 4);
  zx << 1.0, -0.5, 2.0, 0.25;
  zw << 0.5, 1.5, -1.0, 0.75;
  const Matrix got = solver.solve(zx, zw);
  const Matrix want = dense_solve(t, zx, zw);
  CHECK((got - want).lpNorm<Eigen::Infinity>() <= 1e-12);

  // The system matrix for K=1, N=2 is [[2.16, -0.4], [-0.4, 2]].
  const Matrix m = ConsensusSolver::dense_system(t, 2);
  CHECK(m(0, 0) == doctest::Approx(2.16).epsilon(1e-15));
  CHECK(m(0, 1) == doctest::Approx(-0.4).epsilon(1e-15));
  CHECK(m(1, 0) == doctest::Approx(-0.4).epsilon(1e-15));
  CHECK(m(1, 1) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("two-dimensional transition [0.4, 0.2] diagonal case") {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 0.4;
  d(1, 1) = 0.2;
  const TransitionModel t(d);
  const ConsensusSolver solver(t, 5);
  std::mt19937_64 rng(43);
  const Matrix zx = random_matrix(2, 5, rng);
  const Matrix zw = random_matrix(2, 5, rng);
  CHECK((solver.solve(zx, zw) - dense_solve(t, zx, zw)).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("single-column series degenerates to (2I)^{-1}(zx + zw)") {
  // N = 1: the system is 2I regardless of D, and G^T reduces to the identity.
  const TransitionModel t = TransitionModel::scalar(0.9);
  const ConsensusSolver solver(t, 1);
  Matrix zx(1, 1), zw(1, 1);
  zx << 3.0;
  zw << 1.0;
  CHECK(solver.solve(zx, zw)(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("solver validates shapes") {
  const TransitionModel t = TransitionModel::scalar(0.5);
  CHECK_THROWS_AS(ConsensusSolver(t, 0), ShapeError);
  const ConsensusSolver solver(t, 3);
  CHECK_THROWS_AS(solver.solve(Matrix::Ones(1, 2), Matrix::Ones(1, 3)), ShapeError);
  CHECK_THROWS_AS(solver.solve(Matrix::Ones(2, 3), Matrix::Ones(2, 3)), ShapeError);
}
