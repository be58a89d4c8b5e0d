#include "gnh/banded.hpp"

#include "gnh/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gnh {

BlockBandedMatrix::BlockBandedMatrix(int num_blocks, int block, int bandwidth)
    : n_(num_blocks), b_(block), k_(bandwidth) {
  if (num_blocks <= 0 || block <= 0 || bandwidth < 0)
    throw std::invalid_argument("BlockBandedMatrix: invalid dimensions");
  bands_.assign(static_cast<std::size_t>(n_) * static_cast<std::size_t>(k_ + 1), Eigen::MatrixXd::Zero(b_, b_));
}

Eigen::MatrixXd& BlockBandedMatrix::lower(int i, int j) {
  if (i < 0 || i >= n_ || j < 0 || j > i || i - j > k_) {
    std::ostringstream os;
    os << "BlockBandedMatrix: block (" << i << ", " << j << ") outside band " << k_;
    throw std::out_of_range(os.str());
  }
  return bands_[static_cast<std::size_t>(i) * static_cast<std::size_t>(k_ + 1) + static_cast<std::size_t>(i - j)];
}

const Eigen::MatrixXd& BlockBandedMatrix::lower(int i, int j) const {
  return const_cast<BlockBandedMatrix*>(this)->lower(i, j);
}

Eigen::MatrixXd BlockBandedMatrix::block(int i, int j) const {
  if (std::abs(i - j) > k_) return Eigen::MatrixXd::Zero(b_, b_);
  return j <= i ? lower(i, j) : Eigen::MatrixXd(lower(j, i).transpose());
}

void BlockBandedMatrix::add_block(int i, int j, const Eigen::MatrixXd& m) {
  if (j <= i)
    lower(i, j) += m;
  else
    lower(j, i) += m.transpose();
}

void BlockBandedMatrix::add_diagonal(double shift) {
  for (int i = 0; i < n_; ++i) lower(i, i).diagonal().array() += shift;
}

Eigen::MatrixXd BlockBandedMatrix::to_dense() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows(), rows());
  for (int i = 0; i < n_; ++i)
    for (int j = std::max(0, i - k_); j <= i; ++j) {
      out.block(i * b_, j * b_, b_, b_) = lower(i, j);
      if (i != j) out.block(j * b_, i * b_, b_, b_) = lower(i, j).transpose();
    }
  return out;
}

Eigen::VectorXd BlockBandedMatrix::multiply(const Eigen::VectorXd& x) const {
  if (x.size() != rows()) throw std::invalid_argument("BlockBandedMatrix: multiply size mismatch");
  Eigen::VectorXd y = Eigen::VectorXd::Zero(rows());
  for (int i = 0; i < n_; ++i)
    for (int j = std::max(0, i - k_); j <= i; ++j) {
      y.segment(i * b_, b_) += lower(i, j) * x.segment(j * b_, b_);
      if (i != j) y.segment(j * b_, b_) += lower(i, j).transpose() * x.segment(i * b_, b_);
    }
  return y;
}

bool BandedCholesky::factor(const BlockBandedMatrix& h, double shift, double pivot_floor) {
  n_ = h.num_blocks();
  b_ = h.block_size();
  k_ = h.bandwidth();
  l_.assign(static_cast<std::size_t>(n_) * static_cast<std::size_t>(k_ + 1), Eigen::MatrixXd::Zero(b_, b_));
  auto at = [&](int i, int j) -> Eigen::MatrixXd& {
    return l_[static_cast<std::size_t>(i) * static_cast<std::size_t>(k_ + 1) + static_cast<std::size_t>(i - j)];
  };
  for (int i = 0; i < n_; ++i) {
    for (int j = std::max(0, i - k_); j <= i; ++j) {
      Eigen::MatrixXd s = h.lower(i, j);
      if (i == j) s.diagonal().array() += shift;
      for (int m = std::max(0, i - k_); m < j; ++m) s.noalias() -= at(i, m) * at(j, m).transpose();
      if (i == j) {
        Eigen::LLT<Eigen::MatrixXd> llt(s);
        if (llt.info() != Eigen::Success) return false;
        Eigen::MatrixXd l = llt.matrixL();
        if (l.diagonal().minCoeff() <= pivot_floor) return false;
        at(i, i) = l;
      } else {
        // L_ij = S L_jj^{-T}
        at(i, j) = at(j, j).triangularView<Eigen::Lower>().solve(s.transpose()).transpose();
      }
    }
  }
  return true;
}

Eigen::VectorXd BandedCholesky::solve(const Eigen::VectorXd& rhs) const {
  auto at = [&](int i, int j) -> const Eigen::MatrixXd& {
    return l_[static_cast<std::size_t>(i) * static_cast<std::size_t>(k_ + 1) + static_cast<std::size_t>(i - j)];
  };
  Eigen::VectorXd y = rhs;
  for (int i = 0; i < n_; ++i) {
    Eigen::VectorXd s = y.segment(i * b_, b_);
    for (int j = std::max(0, i - k_); j < i; ++j) s.noalias() -= at(i, j) * y.segment(j * b_, b_);
    y.segment(i * b_, b_) = at(i, i).triangularView<Eigen::Lower>().solve(s);
  }
  for (int i = n_ - 1; i >= 0; --i) {
    Eigen::VectorXd s = y.segment(i * b_, b_);
    for (int j = i + 1; j <= std::min(n_ - 1, i + k_); ++j) s.noalias() -= at(j, i).transpose() * y.segment(j * b_, b_);
    y.segment(i * b_, b_) = at(i, i).transpose().triangularView<Eigen::Upper>().solve(s);
  }
  return y;
}

BandedSolveResult banded_cholesky_solve(const BlockBandedMatrix& h, const Eigen::VectorXd& rhs,
                                        const RegularizationPolicy& policy) {
  if (rhs.size() != h.rows()) throw std::invalid_argument("banded_cholesky_solve: rhs size mismatch");
  double max_diag = 0.0;
  for (int i = 0; i < h.num_blocks(); ++i) max_diag = std::max(max_diag, h.lower(i, i).diagonal().cwiseAbs().maxCoeff());
  // pivots of L are square roots of the Schur complement diagonal
  const double floor = std::sqrt(policy.relative_pivot_floor * std::max(max_diag, 1e-300));

  BandedCholesky chol;
  BandedSolveResult result;
  double shift = 0.0;
  while (true) {
    ++result.attempts;
    if (chol.factor(h, shift, floor)) {
      result.shift = shift;
      result.x = chol.solve(rhs);
      return result;
    }
    shift = shift == 0.0 ? policy.initial : shift * policy.growth;
    if (shift > policy.cap * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "banded_cholesky_solve: factorization failed with shift up to " << policy.cap;
      throw NumericalError(os.str());
    }
  }
}

}  // namespace gnh
