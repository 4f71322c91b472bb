#include <doctest.h>

#include <Eigen/SVD>
#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "modmap/priors.hpp"

using namespace modmap;

namespace {

Matrix random_matrix(Index rows, Index cols, std::uint64_t seed, double scale = 3.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-scale, scale);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m(i) = dist(rng);
  return m;
}

std::vector<std::unique_ptr<SystemPrior>> all_priors() {
  std::vector<std::unique_ptr<SystemPrior>> priors;
  priors.push_back(std::make_unique<GaussianPrior>(0.3, 0.8));
  priors.push_back(std::make_unique<L1Prior>());
  priors.push_back(std::make_unique<GroupSparsePrior>());
  priors.push_back(std::make_unique<NuclearNormPrior>());
  return priors;
}

}  // namespace

TEST_CASE("prox depends on beta and rho only through their ratio") {
  const Matrix w = random_matrix(3, 5, 17);
  for (const auto& prior : all_priors()) {
    const Matrix base = prior->prox(w, 2.0, 5.0);
    const Matrix scaled = prior->prox(w, 6.0, 15.0);
    CHECK((base - scaled).lpNorm<Eigen::Infinity>() <= 1e-12);
  }
}

TEST_CASE("beta = 0 makes every prox the identity") {
  const Matrix w = random_matrix(2, 7, 19);
  for (const auto& prior : all_priors()) {
    CHECK((prior->prox(w, 0.0, 3.0) - w).lpNorm<Eigen::Infinity>() == 0.0);
  }
}

TEST_CASE("prox arguments are validated") {
  const Matrix w = Matrix::Ones(1, 1);
  L1Prior prior;
  CHECK_THROWS_AS(prior.prox(w, -1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(prior.prox(w, 1.0, 0.0), ConfigError);
  CHECK_THROWS_AS(GaussianPrior(0.0, 0.0), ConfigError);
}

TEST_CASE("gaussian prox interpolates toward gamma") {
  // beta/sigma^2 = 4, rho = 4: prox = (4*gamma + 4*w)/8 = (gamma + w)/2.
  const GaussianPrior prior(1.0, 0.5);
  Matrix w(1, 3);
  w << 0.0, 1.0, 3.0;
  const Matrix out = prior.prox(w, 1.0, 4.0);
  CHECK(out(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(out(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(out(0, 2) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(prior.phi(w) == doctest::Approx((1.0 + 0.0 + 4.0) / (2.0 * 0.25)).epsilon(1e-14));
}

TEST_CASE("l1 prox soft-thresholds entrywise") {
  L1Prior prior;
  Matrix w(2, 2);
  w << 3.0, -0.5, 0.0, -2.5;
  const Matrix out = prior.prox(w, 1.0, 1.0);  // t = 1
  CHECK(out(0, 0) == 2.0);
  CHECK(out(0, 1) == 0.0);
  CHECK(out(1, 0) == 0.0);
  CHECK(out(1, 1) == -1.5);
  CHECK(prior.phi(w) == doctest::Approx(6.0));
}

TEST_CASE("group prox shrinks rows by their norms") {
  GroupSparsePrior prior;
  Matrix w(2, 2);
  w << 3.0, 4.0,   // norm 5 -> scale (1 - 1/5) = 0.8
      0.3, 0.4;    // norm 0.5 <= t -> zeroed
  const Matrix out = prior.prox(w, 1.0, 1.0);
  CHECK(std::abs(out(0, 0) - 2.4) <= 1e-12);
  CHECK(std::abs(out(0, 1) - 3.2) <= 1e-12);
  CHECK(out(1, 0) == 0.0);
  CHECK(out(1, 1) == 0.0);
  CHECK(prior.phi(w) == doctest::Approx(5.5));
}

TEST_CASE("nuclear prox soft-thresholds singular values") {
  NuclearNormPrior prior;
  Matrix w = Matrix::Zero(2, 2);
  w(0, 0) = 3.0;
  w(1, 1) = 1.0;
  const Matrix out = prior.prox(w, 1.0, 1.0);  // singular values 3, 1 -> 2, 0
  CHECK(std::abs(out(0, 0) - 2.0) <= 1e-12);
  CHECK(std::abs(out(1, 1)) <= 1e-12);
  CHECK(std::abs(out(0, 1)) <= 1e-12);
  CHECK(std::abs(out(1, 0)) <= 1e-12);
  CHECK(prior.phi(w) == doctest::Approx(4.0));
}

TEST_CASE("nuclear prox output has exact zero tail singular values") {
  const Matrix w = random_matrix(6, 8, 23);
  NuclearNormPrior prior;
  Eigen::BDCSVD<Matrix> before(w);
  const double t = before.singularValues()(2);  // threshold at the third value
  const Matrix out = prior.prox(w, t, 1.0);
  Eigen::BDCSVD<Matrix> after(out);
  const Vector sv = after.singularValues();
  // Everything at or below the threshold collapses to numerically exact zero.
  for (Index i = 2; i < sv.size(); ++i) CHECK(sv(i) <= 1e-12 * sv(0));
}

TEST_CASE("proxes are firmly nonexpansive on random pairs") {
  std::mt19937_64 rng(29);
  for (const auto& prior : all_priors()) {
    for (int trial = 0; trial < 10; ++trial) {
      const Matrix a = random_matrix(3, 4, rng());
      const Matrix b = random_matrix(3, 4, rng());
      const Matrix pa = prior->prox(a, 1.3, 2.0);
      const Matrix pb = prior->prox(b, 1.3, 2.0);
      const double lhs = (pa - pb).squaredNorm();
      const double rhs = ((pa - pb).array() * (a - b).array()).sum();
      CHECK(lhs <= rhs + 1e-10);
    }
  }
}

TEST_CASE("prox minimizes its objective against perturbations") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double beta = 1.7, rho = 2.3;
  for (const auto& prior : all_priors()) {
    const Matrix w_tilde = random_matrix(3, 5, rng());
    const Matrix w = prior->prox(w_tilde, beta, rho);
    const double value = beta * prior->phi(w) + 0.5 * rho * (w - w_tilde).squaredNorm();
    for (int trial = 0; trial < 200; ++trial) {
      Matrix delta(3, 5);
      for (Index i = 0; i < delta.size(); ++i) delta(i) = gauss(rng);
      delta *= 1e-3 / delta.norm();
      const Matrix cand = w + delta;
      const double cand_value =
          beta * prior->phi(cand) + 0.5 * rho * (cand - w_tilde).squaredNorm();
      CHECK(cand_value >= value - 1e-12);
    }
  }
}
