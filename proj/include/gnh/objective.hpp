#pragma once

#include "gnh/banded.hpp"
#include "gnh/kinematics.hpp"
#include "gnh/trajectory.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace gnh {

// ---------------------------------------------------------------------------
// Task maps

class TaskMap {
 public:
  virtual ~TaskMap() = default;
  virtual int input_dim() const = 0;
  virtual int output_dim() const = 0;
  virtual VectorXd map(const VectorXd& q) const = 0;
  virtual MatrixXd jacobian(const VectorXd& q) const = 0;
};

class IdentityMap final : public TaskMap {
 public:
  explicit IdentityMap(int d) : d_(d) {}
  int input_dim() const override { return d_; }
  int output_dim() const override { return d_; }
  VectorXd map(const VectorXd& q) const override { return q; }
  MatrixXd jacobian(const VectorXd&) const override { return MatrixXd::Identity(d_, d_); }

 private:
  int d_;
};

/// z = A q + c
class AffineMap final : public TaskMap {
 public:
  AffineMap(MatrixXd a, VectorXd c) : a_(std::move(a)), c_(std::move(c)) {}
  int input_dim() const override { return static_cast<int>(a_.cols()); }
  int output_dim() const override { return static_cast<int>(a_.rows()); }
  VectorXd map(const VectorXd& q) const override { return a_ * q + c_; }
  MatrixXd jacobian(const VectorXd&) const override { return a_; }

 private:
  MatrixXd a_;
  VectorXd c_;
};

/// World position of a named frame.
class PointMap final : public TaskMap {
 public:
  PointMap(std::shared_ptr<const KinematicChain> chain, std::string frame);
  int input_dim() const override { return chain_->dof(); }
  int output_dim() const override { return 3; }
  VectorXd map(const VectorXd& q) const override;
  MatrixXd jacobian(const VectorXd& q) const override;

 private:
  std::shared_ptr<const KinematicChain> chain_;
  std::string frame_;
};

/// Rigid body inertial map, 12 coordinates per body.
class InertialMap final : public TaskMap {
 public:
  explicit InertialMap(std::shared_ptr<const KinematicChain> chain);
  int input_dim() const override { return chain_->dof(); }
  int output_dim() const override { return 12 * static_cast<int>(chain_->bodies().size()); }
  VectorXd map(const VectorXd& q) const override { return inertial_map(*chain_, q); }
  MatrixXd jacobian(const VectorXd& q) const override { return inertial_map_jacobian(*chain_, q); }

 private:
  std::shared_ptr<const KinematicChain> chain_;
};

// ---------------------------------------------------------------------------
// Cliques and terms

/// One clique window handed to a term: the stacked configurations plus where it sits.
struct Clique {
  VectorXd q;  ///< (K+1)*d stacked configurations
  int t = 1;
  int d = 0;
  CliqueIndexing indexing{0, 1};
  double dt = 1.0;

  int window() const { return indexing.window(); }
  VectorXd config(int i) const { return q.segment(static_cast<Eigen::Index>(i) * d, d); }
  bool is_first() const { return t == 1; }
  bool is_last() const { return t == indexing.num_cliques(); }
  /// Window offsets of the single configurations this clique is responsible for:
  /// the current configuration q_t, plus the trailing ones on the last clique.
  std::vector<int> owned_offsets() const;
};

Clique make_clique(const Trajectory& traj, int t, const CliqueIndexing& indexing);

/// Which cliques a term is attached to.
struct TimeSelector {
  enum class Kind { every, first, last, final_step };
  Kind kind = Kind::every;

  bool matches(const Clique& c) const;
  static TimeSelector every() { return {Kind::every}; }
  static TimeSelector first() { return {Kind::first}; }
  static TimeSelector last() { return {Kind::last}; }
  /// The clique whose current configuration is q_T.
  static TimeSelector final_step() { return {Kind::final_step}; }
};

struct TermEval {
  double value = 0.0;
  VectorXd gradient;
  MatrixXd hessian;  ///< Gauss-Newton
};

class CliqueTerm {
 public:
  virtual ~CliqueTerm() = default;

  /// Highest finite-difference order the term reads; sets the minimum clique order.
  virtual int order() const = 0;
  /// dt the term was built for, if it depends on one.
  virtual std::optional<double> dt() const { return std::nullopt; }
  virtual std::string name() const = 0;

  virtual TermEval evaluate(const Clique& c, bool want_gradient, bool want_hessian) const = 0;

  double value(const Clique& c) const { return evaluate(c, false, false).value; }
  VectorXd gradient(const Clique& c) const { return evaluate(c, true, false).gradient; }
  MatrixXd gn_hessian(const Clique& c) const { return evaluate(c, false, true).hessian; }

  const TimeSelector& when() const { return when_; }
  void set_when(TimeSelector s) { when_ = s; }

 private:
  TimeSelector when_;
};

using TermPtr = std::shared_ptr<const CliqueTerm>;

/// (w/2) * |D^(k) phi(q^c)|^2 * dt (the dt factor only when `integrate_dt`).
class SquaredDerivativeTerm final : public CliqueTerm {
 public:
  SquaredDerivativeTerm(std::shared_ptr<const TaskMap> phi, FiniteDiffOperator op, double weight,
                        bool integrate_dt = true, std::string name = "squared_derivative");

  int order() const override { return op_.order(); }
  std::optional<double> dt() const override { return op_.dt(); }
  std::string name() const override { return name_; }
  TermEval evaluate(const Clique& c, bool want_gradient, bool want_hessian) const override;

  const FiniteDiffOperator& op() const { return op_; }
  double weight() const { return weight_; }
  bool integrates_dt() const { return integrate_dt_; }
  const TaskMap& task_map() const { return *phi_; }

 private:
  std::shared_ptr<const TaskMap> phi_;
  FiniteDiffOperator op_;
  double weight_;
  bool integrate_dt_;
  std::string name_;
};

/// (w/2) |q - q_default|^2 on each owned configuration.
class PostureTerm final : public CliqueTerm {
 public:
  PostureTerm(VectorXd q_default, double weight);
  int order() const override { return 0; }
  std::string name() const override { return "posture"; }
  TermEval evaluate(const Clique& c, bool want_gradient, bool want_hessian) const override;

 private:
  VectorXd q_default_;
  double weight_;
};

/// w * sum_i max{0, q_i - (q_max - eps), (q_min + eps) - q_i}^2 on each owned configuration.
class JointLimitPenalty final : public CliqueTerm {
 public:
  JointLimitPenalty(VectorXd q_min, VectorXd q_max, double margin, double weight);
  int order() const override { return 0; }
  std::string name() const override { return "joint_limit_penalty"; }
  TermEval evaluate(const Clique& c, bool want_gradient, bool want_hessian) const override;

 private:
  VectorXd lo_;
  VectorXd hi_;
  double weight_;
};

std::shared_ptr<SquaredDerivativeTerm> squared_derivative_term(std::shared_ptr<const TaskMap> phi, int k,
                                                               double weight, double dt);
/// Squared task velocity through the rigid body inertial map: exact kinetic energy.
std::shared_ptr<SquaredDerivativeTerm> kinetic_energy_term(std::shared_ptr<const KinematicChain> chain,
                                                           double weight, double dt);
/// alpha1 |q_dot|^2 + alpha2 |q_ddot|^2 (integrated over dt).
std::vector<TermPtr> config_penalty_terms(int d, double alpha1, double alpha2, double dt);
std::shared_ptr<PostureTerm> posture_term(VectorXd q_default, double weight);
std::shared_ptr<JointLimitPenalty> joint_limit_penalty(VectorXd q_min, VectorXd q_max, double margin,
                                                       double weight);

// ---------------------------------------------------------------------------
// Assembly

/// Largest order among the terms (at least `minimum`).
int clique_order(const std::vector<TermPtr>& terms, int minimum = 0);

struct AssembledObjective {
  double value = 0.0;
  VectorXd gradient;
  BlockBandedMatrix hessian;  ///< Gauss-Newton, half-bandwidth K blocks
};

/// Sum of all clique contributions. Throws std::invalid_argument when a term was built
/// for a different dt or needs a wider clique than `indexing`.
AssembledObjective assemble(const std::vector<TermPtr>& terms, const Trajectory& traj,
                            const CliqueIndexing& indexing, bool want_hessian = true);
AssembledObjective assemble(const std::vector<TermPtr>& terms, const Trajectory& traj);

double objective_value(const std::vector<TermPtr>& terms, const Trajectory& traj, const CliqueIndexing& indexing);

/// Dense-matrix assembly of the Gauss-Newton Hessian (oracle for the banded path).
MatrixXd assemble_dense_hessian(const std::vector<TermPtr>& terms, const Trajectory& traj,
                                const CliqueIndexing& indexing);

// ---------------------------------------------------------------------------
// Finite-difference true Hessian

struct FdHessianOptions {
  enum class Scheme {
    gradient,  ///< central differences of the analytic gradient
    value,     ///< second-order central differences of the objective value
  };
  Scheme scheme = Scheme::gradient;
  /// Step; when unset h = max(1e-4, 1e-4 * |q|_inf).
  std::optional<double> step;
  /// Combine steps h and h/2 to cancel the O(h^2) truncation term.
  bool richardson = true;
  /// Relative asymmetry |H - H^T| / |H| above which the FD Hessian is rejected.
  double asymmetry_tolerance = 1e-3;
};

/// d x d block (i, j) of the true Hessian over free configurations q_i, q_j (1-based).
MatrixXd fd_hessian_block(const std::vector<TermPtr>& terms, const Trajectory& traj,
                          const CliqueIndexing& indexing, int i, int j, const FdHessianOptions& options = {});

struct HessianComparison {
  int t = 0;
  double scale = 1.0;
  MatrixXd true_block;  ///< scaled
  MatrixXd gn_block;    ///< scaled
  double err = 0.0;     ///< |H - H_gn|_F / |H|_F
  double distance = 0.0;  ///< |H - H_gn|_F of the scaled blocks
  double asymmetry = 0.0;
};

/// Compares the FD true Hessian block of q_t with the assembled Gauss-Newton block. Both
/// are multiplied by `scale` (typically dt^{2k}). Throws NumericalError when the FD block
/// is asymmetric beyond the tolerance.
HessianComparison full_hessian_fd(const std::vector<TermPtr>& terms, const Trajectory& traj, int t,
                                  double scale, const FdHessianOptions& options = {});

// ---------------------------------------------------------------------------
// Self-checks

/// max |g_fd - g| / max(|g|_inf, 1) with central differences of step h.
double gradient_check(const CliqueTerm& term, const Clique& c, double h = 1e-6);
/// max |J_fd - J| / max(|J|_inf, 1).
double jacobian_check(const TaskMap& phi, const VectorXd& q, double h = 1e-6);

}  // namespace gnh
