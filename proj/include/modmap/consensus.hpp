#pragma once

#include <vector>

#include "modmap/core.hpp"

namespace modmap {

// Solves the consensus system (I + G^T G) z = zx_tilde + G^T zw_tilde, where
// G is the block lower-bidiagonal matrix of the transition map (I blocks on
// the diagonal, -D below). The matrix is symmetric positive definite with
// diagonal blocks 2I + D^T D (last block 2I) and off-diagonal blocks -D, so a
// block-tridiagonal Cholesky factorization is computed once at construction
// (O(N K^3)) and each solve is O(N K^2).
class ConsensusSolver {
 public:
  ConsensusSolver(const TransitionModel& t, Index n);

  Index state_dim() const { return d_.rows(); }
  Index length() const { return n_; }
  const Matrix& transition_matrix() const { return d_; }

  // zx_tilde, zw_tilde are K x N; returns the K x N consensus iterate.
  Matrix solve(const Matrix& zx_tilde, const Matrix& zw_tilde) const;
  LatentSeries solve(const LatentSeries& zx_tilde, const LatentSeries& zw_tilde) const;

  // Dense assembly of I + G^T G (KN x KN), for equivalence checks.
  static Matrix dense_system(const TransitionModel& t, Index n);

 private:
  Index n_;
  Matrix d_;
  std::vector<Matrix> diag_l_;  // lower Cholesky factor of each pivot block
  std::vector<Matrix> sub_;     // L_{n+1,n}
};

}  // namespace modmap
