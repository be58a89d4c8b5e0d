#pragma once

#include "gnh/banded.hpp"
#include "gnh/objective.hpp"

#include <memory>
#include <string>
#include <vector>

namespace gnh {

enum class ConstraintKind { equality, inequality };

/// Constraint rows on one clique: values, Jacobian w.r.t. the clique vector, and optional
/// Gauss-Newton Hessians per row (empty when the constraint is treated as linearized).
struct ConstraintEval {
  VectorXd values;
  MatrixXd jacobian;
  std::vector<MatrixXd> hessians;
};

class ConstraintTerm {
 public:
  virtual ~ConstraintTerm() = default;
  virtual ConstraintKind kind() const = 0;
  virtual int order() const { return 0; }
  virtual std::string name() const = 0;
  virtual ConstraintEval evaluate(const Clique& c, bool want_jacobian, bool want_hessian) const = 0;

  const TimeSelector& when() const { return when_; }
  void set_when(TimeSelector s) { when_ = s; }

 private:
  TimeSelector when_;
};

using ConstraintPtr = std::shared_ptr<const ConstraintTerm>;

/// g = (radius + margin) - |x(q) - center| <= 0 for a named frame, on every owned configuration.
class ObstacleConstraint final : public ConstraintTerm {
 public:
  ObstacleConstraint(std::shared_ptr<const KinematicChain> chain, std::string frame, Vector3d center, double radius,
                     double margin);
  ConstraintKind kind() const override { return ConstraintKind::inequality; }
  std::string name() const override { return "obstacle"; }
  ConstraintEval evaluate(const Clique& c, bool want_jacobian, bool want_hessian) const override;

 private:
  PointMap point_;
  Vector3d center_;
  double clearance_;
};

/// h = |x(q_T) - goal|^2 = 0, attached to the final time step.
class GoalConstraint final : public ConstraintTerm {
 public:
  GoalConstraint(std::shared_ptr<const KinematicChain> chain, std::string frame, Vector3d goal);
  ConstraintKind kind() const override { return ConstraintKind::equality; }
  std::string name() const override { return "goal"; }
  ConstraintEval evaluate(const Clique& c, bool want_jacobian, bool want_hessian) const override;

 private:
  PointMap point_;
  Vector3d goal_;
};

/// q - q_max <= 0 and q_min - q <= 0 on every owned configuration.
class JointLimitConstraint final : public ConstraintTerm {
 public:
  JointLimitConstraint(VectorXd q_min, VectorXd q_max);
  ConstraintKind kind() const override { return ConstraintKind::inequality; }
  std::string name() const override { return "joint_limits"; }
  ConstraintEval evaluate(const Clique& c, bool want_jacobian, bool want_hessian) const override;

 private:
  VectorXd lo_;
  VectorXd hi_;
};

/// Single-coordinate equality q[index] - target = 0 on every owned configuration.
class CoordinateConstraint final : public ConstraintTerm {
 public:
  CoordinateConstraint(int index, double target);
  ConstraintKind kind() const override { return ConstraintKind::equality; }
  std::string name() const override { return "coordinate"; }
  ConstraintEval evaluate(const Clique& c, bool want_jacobian, bool want_hessian) const override;

 private:
  int index_;
  double target_;
};

std::shared_ptr<ObstacleConstraint> obstacle_constraint(std::shared_ptr<const KinematicChain> chain,
                                                        std::string frame, Vector3d center, double radius,
                                                        double margin);
std::shared_ptr<GoalConstraint> goal_constraint(std::shared_ptr<const KinematicChain> chain, std::string frame,
                                                Vector3d goal);
std::shared_ptr<JointLimitConstraint> joint_limit_constraints(VectorXd q_min, VectorXd q_max);

/// max |J_fd - J| / max(|J|_inf, 1) of a constraint's rows on one clique.
double constraint_jacobian_check(const ConstraintTerm& constraint, const Clique& c, double h = 1e-6);

// ---------------------------------------------------------------------------

struct Problem {
  Trajectory initial;
  std::vector<TermPtr> terms;
  std::vector<ConstraintPtr> constraints;
};

int problem_order(const Problem& problem);

struct OptimizerConfig {
  double tol_g = 1e-6;
  double tol_c = 1e-6;
  int max_inner = 100;
  int max_outer = 40;
  double rho_initial = 10.0;
  double rho_growth = 10.0;
  double rho_max = 1e8;
  double violation_shrink = 4.0;  ///< required violation reduction per outer iteration
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  int max_halvings = 30;
  RegularizationPolicy regularization;
};

enum class Termination { converged, max_iterations, line_search_failure, solver_failure };
std::string to_string(Termination t);

/// Multiplier estimates, indexed [constraint][clique t - 1].
struct AugLagState {
  std::vector<std::vector<VectorXd>> multipliers;
  double rho = 10.0;
  int outer_iterations = 0;
  int inner_iterations = 0;
};

struct SolveReport {
  explicit SolveReport(Trajectory t) : trajectory(std::move(t)) {}

  Trajectory trajectory;
  std::vector<double> objective_history;   ///< after each outer iteration (entry 0 = initial)
  std::vector<double> violation_history;   ///< max-norm violation, same indexing
  std::vector<std::vector<double>> proxy_history;  ///< per inner loop, proxy value at each accepted iterate
  int inner_iterations = 0;
  int outer_iterations = 0;
  Termination termination = Termination::max_iterations;
  std::string message;

  // diagnostics
  double final_gradient_norm = 0.0;
  double kkt_residual = 0.0;
  std::vector<double> regularization_shifts;  ///< Levenberg shift of every inner iteration
  std::vector<double> condition_estimates;    ///< diagonal ratio of each Hessian (cheap conditioning proxy)
  int line_search_rejections = 0;             ///< rejected trial steps
  int stalled_inner_loops = 0;                ///< inner loops stopped at rounding-level decrease
  int inner_line_search_failures = 0;         ///< inner loops ended by a failed line search
  AugLagState state;
};

/// Value, gradient and Gauss-Newton Hessian of the unconstrained proxy.
struct ProxyEvaluation {
  double value = 0.0;
  double objective = 0.0;
  VectorXd gradient;
  BlockBandedMatrix hessian;
};

ProxyEvaluation evaluate_proxy(const Problem& problem, const AugLagState& state, const Trajectory& traj,
                               bool want_hessian);

/// Max violation over all constraint rows: |h| for equalities, max(0, g) for inequalities.
double max_violation(const Problem& problem, const Trajectory& traj);

/// Newton iterations on the proxy with Gauss-Newton Hessians, banded solves and Armijo
/// backtracking. Updates `traj` in place, appends to the proxy history and diagnostics of
/// `report`, and returns `converged` once |gradient|_inf <= tol_g.
Termination newton_inner_loop(const Problem& problem, const AugLagState& state, Trajectory& traj,
                              const OptimizerConfig& config, SolveReport& report);

SolveReport augmented_lagrangian_solve(const Problem& problem, const OptimizerConfig& config = {});

}  // namespace gnh
