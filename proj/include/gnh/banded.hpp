#pragma once

#include <Eigen/Dense>

#include <vector>

namespace gnh {

/// Symmetric block-banded matrix with `num_blocks` diagonal blocks of size `block`
/// and `bandwidth` sub-diagonal block bands. Only the lower band is stored.
class BlockBandedMatrix {
 public:
  BlockBandedMatrix() = default;
  BlockBandedMatrix(int num_blocks, int block, int bandwidth);

  int num_blocks() const { return n_; }
  int block_size() const { return b_; }
  int bandwidth() const { return k_; }
  int rows() const { return n_ * b_; }

  /// Block (i, j) with i - bandwidth <= j <= i. Other blocks are structurally zero.
  Eigen::MatrixXd& lower(int i, int j);
  const Eigen::MatrixXd& lower(int i, int j) const;

  /// Block (i, j) for any i, j inside the band (transposed from storage when j > i).
  Eigen::MatrixXd block(int i, int j) const;

  /// H(i,j) += M, and the mirror block when i != j. Throws when |i - j| > bandwidth.
  void add_block(int i, int j, const Eigen::MatrixXd& m);
  void add_diagonal(double shift);

  Eigen::MatrixXd to_dense() const;
  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;

 private:
  int n_ = 0;
  int b_ = 0;
  int k_ = 0;
  std::vector<Eigen::MatrixXd> bands_;  // bands_[i * (k_ + 1) + (i - j)]
};

struct BandedSolveResult {
  Eigen::VectorXd x;
  double shift = 0.0;  ///< Levenberg shift that made the factorization succeed
  int attempts = 0;
};

struct RegularizationPolicy {
  double initial = 1e-8;
  double growth = 10.0;
  double cap = 1e4;
  /// Pivots below `relative_pivot_floor * max|diag|` count as factorization failure.
  double relative_pivot_floor = 1e-13;
};

/// Block Cholesky factorization L L^T of a banded SPD matrix. Returns false on a
/// nonpositive pivot without throwing.
class BandedCholesky {
 public:
  bool factor(const BlockBandedMatrix& h, double shift, double pivot_floor);
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

 private:
  int n_ = 0;
  int b_ = 0;
  int k_ = 0;
  std::vector<Eigen::MatrixXd> l_;  // same layout as BlockBandedMatrix
};

/// Solve (H + shift I) x = rhs. The unshifted system is tried first, then shifts
/// initial, initial*growth, ... up to the cap. Throws NumericalError when the cap is hit.
BandedSolveResult banded_cholesky_solve(const BlockBandedMatrix& h, const Eigen::VectorXd& rhs,
                                        const RegularizationPolicy& policy = {});

}  // namespace gnh
