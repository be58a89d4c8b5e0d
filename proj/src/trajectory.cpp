#include "gnh/trajectory.hpp"

#include "gnh/banded.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace gnh {

Trajectory::Trajectory(int T, double dt, VectorXd q_prefix, std::vector<VectorXd> states,
                       VectorXd q_suffix)
    : T_(T), d_(static_cast<int>(q_prefix.size())), dt_(dt), prefix_(std::move(q_prefix)) {
  if (T <= 0) throw std::invalid_argument("trajectory: T must be positive");
  if (!(dt > 0.0)) throw std::invalid_argument("trajectory: dt must be positive");
  if (d_ <= 0) throw std::invalid_argument("trajectory: empty configuration");
  if (static_cast<int>(states.size()) != T)
    throw std::invalid_argument("trajectory: expected " + std::to_string(T) + " states, got " +
                                std::to_string(states.size()));
  if (q_suffix.size() != d_) throw std::invalid_argument("trajectory: suffix dimension mismatch");
  vars_.resize(static_cast<Eigen::Index>(T + 1) * d_);
  for (int i = 0; i < T; ++i) {
    if (states[static_cast<std::size_t>(i)].size() != d_)
      throw std::invalid_argument("trajectory: state dimension mismatch at " + std::to_string(i + 1));
    vars_.segment(static_cast<Eigen::Index>(i) * d_, d_) = states[static_cast<std::size_t>(i)];
  }
  vars_.tail(d_) = q_suffix;
}

Trajectory Trajectory::constant(int T, double dt, const VectorXd& q_start) {
  return Trajectory(T, dt, q_start, std::vector<VectorXd>(static_cast<std::size_t>(std::max(T, 0)), q_start),
                    q_start);
}

VectorXd Trajectory::config(int i) const {
  if (i < 0 || i > T_ + 1) throw std::out_of_range("trajectory: configuration index " + std::to_string(i));
  if (i == 0) return prefix_;
  return vars_.segment(static_cast<Eigen::Index>(i - 1) * d_, d_);
}

void Trajectory::set_config(int i, const VectorXd& q) {
  if (i < 1 || i > T_ + 1) throw std::out_of_range("trajectory: free configuration index " + std::to_string(i));
  if (q.size() != d_) throw std::invalid_argument("trajectory: configuration dimension mismatch");
  vars_.segment(static_cast<Eigen::Index>(i - 1) * d_, d_) = q;
}

Trajectory Trajectory::with_variables(const VectorXd& vars) const {
  if (vars.size() != vars_.size()) throw std::invalid_argument("trajectory: variable vector size mismatch");
  Trajectory out = *this;
  out.vars_ = vars;
  return out;
}

CliqueIndexing::CliqueIndexing(int K, int T) : order(K), steps(T) {
  if (K < 0) throw std::invalid_argument("clique indexing: negative order");
  if (T <= 0) throw std::invalid_argument("clique indexing: T must be positive");
  if (num_cliques() < 1)
    throw std::invalid_argument("clique indexing: order " + std::to_string(K) + " too large for T=" +
                                std::to_string(T));
}

namespace {

std::vector<double> default_stencil(int k) {
  switch (k) {
    case 1: return {-1.0, 1.0};
    case 2: return {1.0, -2.0, 1.0};
    default:
      throw std::invalid_argument("finite difference: no default stencil for order " + std::to_string(k));
  }
}

}  // namespace

FiniteDiffOperator::FiniteDiffOperator(int k, double dt) : FiniteDiffOperator(k, dt, default_stencil(k)) {}

FiniteDiffOperator::FiniteDiffOperator(int k, double dt, std::vector<double> sigma)
    : k_(k), dt_(dt), sigma_(std::move(sigma)) {
  if (!(dt > 0.0)) throw std::invalid_argument("finite difference: dt must be positive");
  if (k < 0) throw std::invalid_argument("finite difference: negative order");
  if (static_cast<int>(sigma_.size()) != k + 1)
    throw std::invalid_argument("finite difference: stencil needs k+1 coefficients");
  scale_ = 1.0 / std::pow(dt, k);
  for (double s : sigma_) sum_sq_ += s * s;
  // alpha_i uses sigma_{k-i}: the reversed stencil
  alpha_.resize(sigma_.size());
  for (int i = 0; i <= k; ++i) {
    const double s = sigma_[static_cast<std::size_t>(k - i)];
    alpha_[static_cast<std::size_t>(i)] = sum_sq_ > 0.0 ? s * s / sum_sq_ : 0.0;
  }
}

FiniteDiffOperator make_fd_operator(int k, double dt) { return FiniteDiffOperator(k, dt); }

VectorXd apply_fd(const FiniteDiffOperator& op, std::span<const VectorXd> clique) {
  const int k = op.order();
  if (static_cast<int>(clique.size()) < k + 1)
    throw std::invalid_argument("apply_fd: clique narrower than stencil");
  const auto m = clique.front().size();
  for (const auto& z : clique)
    if (z.size() != m) throw std::invalid_argument("apply_fd: clique entries differ in dimension");
  VectorXd out = VectorXd::Zero(m);
  for (int i = 0; i <= k; ++i) out += op.coefficient(i) * clique[static_cast<std::size_t>(i)];
  return out;
}

VectorXd extract_clique(const Trajectory& traj, int t, const CliqueIndexing& indexing) {
  if (indexing.steps != traj.steps())
    throw std::invalid_argument("extract_clique: indexing built for a different T");
  if (t < 1 || t > indexing.num_cliques())
    throw std::out_of_range("extract_clique: clique index " + std::to_string(t) + " outside [1, " +
                            std::to_string(indexing.num_cliques()) + "]");
  const int d = traj.dof();
  const int w = indexing.window();
  const int tau = indexing.start(t);
  VectorXd out(static_cast<Eigen::Index>(w) * d);
  for (int i = 0; i < w; ++i) out.segment(static_cast<Eigen::Index>(i) * d, d) = traj.config(tau + i);
  return out;
}

namespace {

void check_clique(int t, const CliqueIndexing& indexing) {
  if (t < 1 || t > indexing.num_cliques())
    throw std::out_of_range("scatter_clique: clique index " + std::to_string(t) + " out of band");
}

}  // namespace

void scatter_clique(const VectorXd& block, int t, const CliqueIndexing& indexing, int d, VectorXd& target) {
  check_clique(t, indexing);
  const int w = indexing.window();
  if (block.size() != static_cast<Eigen::Index>(w) * d)
    throw std::invalid_argument("scatter_clique: gradient block has wrong size");
  const int tau = indexing.start(t);
  for (int i = 0; i < w; ++i) {
    const int var = tau + i - 1;  // q_1 is variable block 0
    if (var < 0) continue;
    target.segment(static_cast<Eigen::Index>(var) * d, d) += block.segment(static_cast<Eigen::Index>(i) * d, d);
  }
}

void scatter_clique(const MatrixXd& block, int t, const CliqueIndexing& indexing, int d, BlockBandedMatrix& target) {
  check_clique(t, indexing);
  const int w = indexing.window();
  if (block.rows() != static_cast<Eigen::Index>(w) * d || block.cols() != block.rows())
    throw std::invalid_argument("scatter_clique: Hessian block has wrong size");
  const int tau = indexing.start(t);
  for (int i = 0; i < w; ++i) {
    const int vi = tau + i - 1;
    if (vi < 0) continue;
    for (int j = 0; j <= i; ++j) {
      const int vj = tau + j - 1;
      if (vj < 0) continue;
      target.lower(vi, vj) += block.block(static_cast<Eigen::Index>(i) * d, static_cast<Eigen::Index>(j) * d, d, d);
    }
  }
}

void scatter_clique_dense(const MatrixXd& block, int t, const CliqueIndexing& indexing, int d, MatrixXd& target) {
  check_clique(t, indexing);
  const int w = indexing.window();
  const int tau = indexing.start(t);
  for (int i = 0; i < w; ++i) {
    const int vi = tau + i - 1;
    if (vi < 0) continue;
    for (int j = 0; j < w; ++j) {
      const int vj = tau + j - 1;
      if (vj < 0) continue;
      target.block(static_cast<Eigen::Index>(vi) * d, static_cast<Eigen::Index>(vj) * d, d, d) +=
          block.block(static_cast<Eigen::Index>(i) * d, static_cast<Eigen::Index>(j) * d, d, d);
    }
  }
}

}  // namespace gnh
