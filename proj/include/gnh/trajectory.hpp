#pragma once

#include <Eigen/Dense>

#include <span>
#include <stdexcept>
#include <vector>

namespace gnh {

using Eigen::MatrixXd;
using Eigen::VectorXd;

class BlockBandedMatrix;

/// Discrete trajectory with a fixed prefix q_0 and free configurations q_1..q_{T+1}.
///
/// The free configurations (including the suffix q_{T+1}) are stored contiguously,
/// one column-major d-block per time step, so that the optimization variable is
/// simply `variables()`.
class Trajectory {
 public:
  Trajectory(int T, double dt, VectorXd q_prefix, std::vector<VectorXd> states, VectorXd q_suffix);

  /// Zero-motion trajectory: every configuration equals `q_start`.
  static Trajectory constant(int T, double dt, const VectorXd& q_start);

  int steps() const { return T_; }
  int dof() const { return d_; }
  double dt() const { return dt_; }

  /// Configuration q_i for i in [0, T+1].
  VectorXd config(int i) const;
  void set_config(int i, const VectorXd& q);

  const VectorXd& prefix() const { return prefix_; }
  const VectorXd& variables() const { return vars_; }
  VectorXd& variables() { return vars_; }
  int num_variables() const { return static_cast<int>(vars_.size()); }

  Trajectory with_variables(const VectorXd& vars) const;

 private:
  int T_;
  int d_;
  double dt_;
  VectorXd prefix_;
  VectorXd vars_;
};

/// Window layout of the k-th order Markov cliques over a trajectory.
///
/// Clique t (1-based) starts at tau_t and spans K+1 configurations; tau_{t+1} = tau_t + 1.
/// For K >= 1 the first clique starts at the prefix, for K = 0 each clique is a single
/// free configuration. The last clique ends at the suffix q_{T+1}.
struct CliqueIndexing {
  int order = 0;  ///< K
  int steps = 0;  ///< T

  CliqueIndexing(int K, int T);

  int window() const { return order + 1; }
  int first_start() const { return order == 0 ? 1 : 0; }
  int start(int t) const { return first_start() + t - 1; }
  int num_cliques() const { return steps + 2 - order - (order == 0 ? 1 : 0); }
  /// Offset inside the window of the configuration q_t the clique is attached to.
  int current_offset() const { return order == 0 ? 0 : 1; }
};

class FiniteDiffOperator {
 public:
  /// Forward stencils (-1, 1) and (1, -2, 1) for k = 1, 2.
  FiniteDiffOperator(int k, double dt);
  /// User-supplied stencil of k+1 coefficients.
  FiniteDiffOperator(int k, double dt, std::vector<double> sigma);

  int order() const { return k_; }
  double dt() const { return dt_; }
  double scale() const { return scale_; }
  const std::vector<double>& sigma() const { return sigma_; }
  /// sigma_i / dt^k
  double coefficient(int i) const { return sigma_[static_cast<std::size_t>(i)] * scale_; }
  double sum_sq() const { return sum_sq_; }
  const std::vector<double>& alpha() const { return alpha_; }

 private:
  int k_;
  double dt_;
  double scale_;
  std::vector<double> sigma_;
  double sum_sq_ = 0.0;
  std::vector<double> alpha_;
};

FiniteDiffOperator make_fd_operator(int k, double dt);

/// sum_i (sigma_i / dt^k) z_{tau+i}; entries past k+1 are zero-padded.
VectorXd apply_fd(const FiniteDiffOperator& op, std::span<const VectorXd> clique);

/// Stacked (K+1)*d clique vector for clique t.
VectorXd extract_clique(const Trajectory& traj, int t, const CliqueIndexing& indexing);

/// Accumulate a clique-local gradient into a trajectory-wide gradient. Prefix rows are dropped.
void scatter_clique(const VectorXd& block, int t, const CliqueIndexing& indexing, int d,
                    VectorXd& target);
/// Accumulate a clique-local Hessian into a banded matrix. Prefix rows/columns are dropped.
void scatter_clique(const MatrixXd& block, int t, const CliqueIndexing& indexing, int d,
                    BlockBandedMatrix& target);
/// Dense variant, used as an assembly oracle.
void scatter_clique_dense(const MatrixXd& block, int t, const CliqueIndexing& indexing, int d,
                          MatrixXd& target);

}  // namespace gnh
