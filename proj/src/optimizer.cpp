#include "gnh/optimizer.hpp"

#include "gnh/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gnh {

// ---------------------------------------------------------------------------
// Constraints

ObstacleConstraint::ObstacleConstraint(std::shared_ptr<const KinematicChain> chain, std::string frame, Vector3d center,
                                       double radius, double margin)
    : point_(std::move(chain), std::move(frame)), center_(std::move(center)), clearance_(radius + margin) {
  if (!(radius > 0.0)) throw std::invalid_argument("obstacle: radius must be positive");
  if (margin < 0.0) throw std::invalid_argument("obstacle: negative margin");
}

ConstraintEval ObstacleConstraint::evaluate(const Clique& c, bool want_jacobian, bool) const {
  const auto owned = c.owned_offsets();
  const auto rows = static_cast<Eigen::Index>(owned.size());
  ConstraintEval out;
  out.values.resize(rows);
  if (want_jacobian) out.jacobian = MatrixXd::Zero(rows, static_cast<Eigen::Index>(c.window()) * c.d);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const int i = owned[static_cast<std::size_t>(r)];
    const VectorXd q = c.config(i);
    const Vector3d diff = point_.map(q) - center_;
    const double dist = diff.norm();
    out.values[r] = clearance_ - dist;
    if (want_jacobian && dist > 0.0)
      out.jacobian.block(r, static_cast<Eigen::Index>(i) * c.d, 1, c.d) = -(diff / dist).transpose() * point_.jacobian(q);
  }
  return out;
}

GoalConstraint::GoalConstraint(std::shared_ptr<const KinematicChain> chain, std::string frame, Vector3d goal)
    : point_(std::move(chain), std::move(frame)), goal_(std::move(goal)) {
  set_when(TimeSelector::final_step());
}

ConstraintEval GoalConstraint::evaluate(const Clique& c, bool want_jacobian, bool want_hessian) const {
  const int i = c.indexing.current_offset();
  const VectorXd q = c.config(i);
  const Vector3d e = point_.map(q) - goal_;
  const auto n = static_cast<Eigen::Index>(c.window()) * c.d;
  const auto o = static_cast<Eigen::Index>(i) * c.d;
  ConstraintEval out;
  out.values = VectorXd::Constant(1, e.squaredNorm());
  if (want_jacobian || want_hessian) {
    const MatrixXd jac = point_.jacobian(q);
    if (want_jacobian) {
      out.jacobian = MatrixXd::Zero(1, n);
      out.jacobian.block(0, o, 1, c.d) = 2.0 * e.transpose() * jac;
    }
    if (want_hessian) {
      MatrixXd h = MatrixXd::Zero(n, n);
      h.block(o, o, c.d, c.d) = 2.0 * jac.transpose() * jac;
      out.hessians.push_back(std::move(h));
    }
  }
  return out;
}

JointLimitConstraint::JointLimitConstraint(VectorXd q_min, VectorXd q_max) : lo_(std::move(q_min)), hi_(std::move(q_max)) {
  if (lo_.size() != hi_.size()) throw std::invalid_argument("joint limits: bound size mismatch");
  if (!lo_.allFinite() || !hi_.allFinite()) throw std::invalid_argument("joint limits: bounds must be finite");
}

ConstraintEval JointLimitConstraint::evaluate(const Clique& c, bool want_jacobian, bool) const {
  if (c.d != lo_.size()) throw std::invalid_argument("joint limits: dimension mismatch");
  const auto owned = c.owned_offsets();
  const Eigen::Index d = c.d;
  const auto rows = static_cast<Eigen::Index>(owned.size()) * 2 * d;
  ConstraintEval out;
  out.values.resize(rows);
  if (want_jacobian) out.jacobian = MatrixXd::Zero(rows, static_cast<Eigen::Index>(c.window()) * d);
  Eigen::Index r = 0;
  for (int i : owned) {
    const VectorXd q = c.config(i);
    for (Eigen::Index j = 0; j < d; ++j) {
      out.values[r] = q[j] - hi_[j];
      out.values[r + 1] = lo_[j] - q[j];
      if (want_jacobian) {
        out.jacobian(r, i * d + j) = 1.0;
        out.jacobian(r + 1, i * d + j) = -1.0;
      }
      r += 2;
    }
  }
  return out;
}

CoordinateConstraint::CoordinateConstraint(int index, double target) : index_(index), target_(target) {}

ConstraintEval CoordinateConstraint::evaluate(const Clique& c, bool want_jacobian, bool) const {
  if (index_ < 0 || index_ >= c.d) throw std::invalid_argument("coordinate constraint: index out of range");
  const auto owned = c.owned_offsets();
  const auto rows = static_cast<Eigen::Index>(owned.size());
  ConstraintEval out;
  out.values.resize(rows);
  if (want_jacobian) out.jacobian = MatrixXd::Zero(rows, static_cast<Eigen::Index>(c.window()) * c.d);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const int i = owned[static_cast<std::size_t>(r)];
    out.values[r] = c.q[i * c.d + index_] - target_;
    if (want_jacobian) out.jacobian(r, i * c.d + index_) = 1.0;
  }
  return out;
}

std::shared_ptr<ObstacleConstraint> obstacle_constraint(std::shared_ptr<const KinematicChain> chain, std::string frame,
                                                        Vector3d center, double radius, double margin) {
  return std::make_shared<ObstacleConstraint>(std::move(chain), std::move(frame), std::move(center), radius, margin);
}

std::shared_ptr<GoalConstraint> goal_constraint(std::shared_ptr<const KinematicChain> chain, std::string frame,
                                                Vector3d goal) {
  return std::make_shared<GoalConstraint>(std::move(chain), std::move(frame), std::move(goal));
}

std::shared_ptr<JointLimitConstraint> joint_limit_constraints(VectorXd q_min, VectorXd q_max) {
  return std::make_shared<JointLimitConstraint>(std::move(q_min), std::move(q_max));
}

double constraint_jacobian_check(const ConstraintTerm& constraint, const Clique& c, double h) {
  const ConstraintEval e = constraint.evaluate(c, true, false);
  MatrixXd fd(e.jacobian.rows(), e.jacobian.cols());
  for (Eigen::Index i = 0; i < c.q.size(); ++i) {
    Clique p = c, m = c;
    p.q[i] += h;
    m.q[i] -= h;
    fd.col(i) = (constraint.evaluate(p, false, false).values - constraint.evaluate(m, false, false).values) / (2.0 * h);
  }
  if (fd.size() == 0) return 0.0;
  return (fd - e.jacobian).cwiseAbs().maxCoeff() / std::max(e.jacobian.cwiseAbs().maxCoeff(), 1.0);
}

// ---------------------------------------------------------------------------
// Augmented Lagrangian proxy

int problem_order(const Problem& problem) {
  int k = clique_order(problem.terms);
  for (const auto& c : problem.constraints) k = std::max(k, c->order());
  return k;
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::max_iterations: return "max-iter";
    case Termination::line_search_failure: return "line-search-failure";
    case Termination::solver_failure: return "solver-failure";
  }
  return "unknown";
}

namespace {

CliqueIndexing indexing_for(const Problem& problem, const Trajectory& traj) {
  return CliqueIndexing(problem_order(problem), traj.steps());
}

AugLagState initial_state(const Problem& problem, const Trajectory& traj, double rho) {
  const CliqueIndexing indexing = indexing_for(problem, traj);
  AugLagState state;
  state.rho = rho;
  for (const auto& con : problem.constraints) {
    std::vector<VectorXd> per_clique(static_cast<std::size_t>(indexing.num_cliques()));
    for (int t = 1; t <= indexing.num_cliques(); ++t) {
      const Clique c = make_clique(traj, t, indexing);
      if (con->when().matches(c))
        per_clique[static_cast<std::size_t>(t - 1)] = VectorXd::Zero(con->evaluate(c, false, false).values.size());
    }
    state.multipliers.push_back(std::move(per_clique));
  }
  return state;
}

template <typename Fn>
void for_each_constraint_clique(const Problem& problem, const Trajectory& traj, Fn&& fn) {
  const CliqueIndexing indexing = indexing_for(problem, traj);
  for (int t = 1; t <= indexing.num_cliques(); ++t) {
    const Clique c = make_clique(traj, t, indexing);
    for (std::size_t k = 0; k < problem.constraints.size(); ++k)
      if (problem.constraints[k]->when().matches(c)) fn(k, c, indexing);
  }
}

double row_violation(ConstraintKind kind, double v) { return kind == ConstraintKind::equality ? std::abs(v) : std::max(0.0, v); }

}  // namespace

ProxyEvaluation evaluate_proxy(const Problem& problem, const AugLagState& state, const Trajectory& traj,
                               bool want_hessian) {
  const CliqueIndexing indexing = indexing_for(problem, traj);
  AssembledObjective base = assemble(problem.terms, traj, indexing, want_hessian);
  ProxyEvaluation out;
  out.objective = base.value;
  out.value = base.value;
  out.gradient = std::move(base.gradient);
  if (want_hessian) out.hessian = std::move(base.hessian);
  else out.hessian = BlockBandedMatrix();
  const double rho = state.rho;
  const int d = traj.dof();

  for_each_constraint_clique(problem, traj, [&](std::size_t k, const Clique& c, const CliqueIndexing& idx) {
    const ConstraintTerm& con = *problem.constraints[k];
    const VectorXd& mult = state.multipliers[k][static_cast<std::size_t>(c.t - 1)];
    const ConstraintEval e = con.evaluate(c, true, want_hessian);
    const auto n = static_cast<Eigen::Index>(c.window()) * d;
    VectorXd grad = VectorXd::Zero(n);
    MatrixXd hess;
    if (want_hessian) hess = MatrixXd::Zero(n, n);
    for (Eigen::Index r = 0; r < e.values.size(); ++r) {
      const double v = e.values[r];
      const double m = mult.size() > r ? mult[r] : 0.0;
      double coeff = 0.0;
      if (con.kind() == ConstraintKind::equality) {
        out.value += m * v + 0.5 * rho * v * v;
        coeff = m + rho * v;
      } else {
        const double shifted = std::max(0.0, m + rho * v);
        out.value += (shifted * shifted - m * m) / (2.0 * rho);
        coeff = shifted;
        if (shifted == 0.0) continue;
      }
      const VectorXd row = e.jacobian.row(r).transpose();
      grad += coeff * row;
      if (want_hessian) {
        hess += rho * row * row.transpose();
        if (coeff > 0.0 && static_cast<std::size_t>(r) < e.hessians.size()) hess += coeff * e.hessians[static_cast<std::size_t>(r)];
      }
    }
    scatter_clique(grad, c.t, idx, d, out.gradient);
    if (want_hessian) scatter_clique(hess, c.t, idx, d, out.hessian);
  });
  return out;
}

double max_violation(const Problem& problem, const Trajectory& traj) {
  double worst = 0.0;
  for_each_constraint_clique(problem, traj, [&](std::size_t k, const Clique& c, const CliqueIndexing&) {
    const ConstraintTerm& con = *problem.constraints[k];
    const VectorXd v = con.evaluate(c, false, false).values;
    for (Eigen::Index r = 0; r < v.size(); ++r) worst = std::max(worst, row_violation(con.kind(), v[r]));
  });
  return worst;
}

namespace {

constexpr double kStallFactor = 64.0;

double condition_proxy(const BlockBandedMatrix& h) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (int i = 0; i < h.num_blocks(); ++i) {
    const auto diag = h.lower(i, i).diagonal().cwiseAbs();
    lo = std::min(lo, diag.minCoeff());
    hi = std::max(hi, diag.maxCoeff());
  }
  return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

void update_multipliers(const Problem& problem, AugLagState& state, const Trajectory& traj) {
  for_each_constraint_clique(problem, traj, [&](std::size_t k, const Clique& c, const CliqueIndexing&) {
    const ConstraintTerm& con = *problem.constraints[k];
    VectorXd& mult = state.multipliers[k][static_cast<std::size_t>(c.t - 1)];
    const VectorXd v = con.evaluate(c, false, false).values;
    if (mult.size() != v.size()) mult = VectorXd::Zero(v.size());
    if (con.kind() == ConstraintKind::equality)
      mult += state.rho * v;
    else
      mult = (mult + state.rho * v).cwiseMax(0.0);
  });
}

// grad f + sum lambda grad h + sum mu grad g with the current multipliers
double kkt_residual(const Problem& problem, const AugLagState& state, const Trajectory& traj) {
  const CliqueIndexing indexing = indexing_for(problem, traj);
  VectorXd g = assemble(problem.terms, traj, indexing, false).gradient;
  for_each_constraint_clique(problem, traj, [&](std::size_t k, const Clique& c, const CliqueIndexing& idx) {
    const VectorXd& mult = state.multipliers[k][static_cast<std::size_t>(c.t - 1)];
    if (mult.size() == 0) return;
    const ConstraintEval e = problem.constraints[k]->evaluate(c, true, false);
    scatter_clique(VectorXd(e.jacobian.transpose() * mult), c.t, idx, traj.dof(), g);
  });
  return g.size() ? g.cwiseAbs().maxCoeff() : 0.0;
}

}  // namespace

Termination newton_inner_loop(const Problem& problem, const AugLagState& state, Trajectory& traj,
                              const OptimizerConfig& config, SolveReport& report) {
  std::vector<double>& history = report.proxy_history.emplace_back();
  ProxyEvaluation cur = evaluate_proxy(problem, state, traj, true);
  history.push_back(cur.value);
  for (int it = 0; it < config.max_inner; ++it) {
    report.final_gradient_norm = cur.gradient.size() ? cur.gradient.cwiseAbs().maxCoeff() : 0.0;
    if (report.final_gradient_norm <= config.tol_g) return Termination::converged;

    BandedSolveResult step;
    try {
      step = banded_cholesky_solve(cur.hessian, -cur.gradient, config.regularization);
    } catch (const NumericalError& e) {
      report.message = e.what();
      return Termination::solver_failure;
    }
    ++report.inner_iterations;
    report.regularization_shifts.push_back(step.shift);
    report.condition_estimates.push_back(condition_proxy(cur.hessian));

    const double slope = cur.gradient.dot(step.x);
    // A predicted decrease below the rounding level of the proxy value cannot be
    // resolved by any line search: the iterate is stationary to working precision.
    if (std::abs(slope) <= kStallFactor * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(cur.value))) {
      report.stalled_inner_loops++;
      return Termination::converged;
    }
    if (!(slope < 0.0)) {
      report.message = "Newton step is not a descent direction";
      return Termination::line_search_failure;
    }
    double alpha = 1.0;
    bool accepted = false;
    ProxyEvaluation trial;
    Trajectory candidate = traj;
    for (int halving = 0; halving <= config.max_halvings; ++halving) {
      candidate = traj.with_variables(traj.variables() + alpha * step.x);
      const double value = evaluate_proxy(problem, state, candidate, false).value;
      if (std::isfinite(value) && value <= cur.value + config.armijo_c * alpha * slope) {
        accepted = true;
        break;
      }
      ++report.line_search_rejections;
      alpha *= config.backtrack;
    }
    if (!accepted) {
      std::ostringstream os;
      os << "line search failed after " << config.max_halvings << " halvings (|grad|_inf = "
         << report.final_gradient_norm << ")";
      report.message = os.str();
      return Termination::line_search_failure;
    }
    traj = std::move(candidate);
    cur = evaluate_proxy(problem, state, traj, true);
    history.push_back(cur.value);
  }
  report.final_gradient_norm = cur.gradient.size() ? cur.gradient.cwiseAbs().maxCoeff() : 0.0;
  return report.final_gradient_norm <= config.tol_g ? Termination::converged : Termination::max_iterations;
}

SolveReport augmented_lagrangian_solve(const Problem& problem, const OptimizerConfig& config) {
  if (!(config.rho_initial > 0.0)) throw std::invalid_argument("augmented Lagrangian: rho_initial must be positive");
  Trajectory traj = problem.initial;
  SolveReport report(traj);
  report.state = initial_state(problem, traj, config.rho_initial);
  AugLagState& state = report.state;

  const CliqueIndexing indexing = indexing_for(problem, traj);
  report.objective_history.push_back(objective_value(problem.terms, traj, indexing));
  report.violation_history.push_back(max_violation(problem, traj));

  double previous_violation = std::numeric_limits<double>::infinity();
  report.termination = Termination::max_iterations;
  for (int outer = 0; outer < config.max_outer; ++outer) {
    ++state.outer_iterations;
    const Termination inner = newton_inner_loop(problem, state, traj, config, report);
    const double violation = max_violation(problem, traj);
    report.objective_history.push_back(objective_value(problem.terms, traj, indexing));
    report.violation_history.push_back(violation);

    if (inner == Termination::solver_failure) {
      report.termination = inner;
      break;
    }
    if (inner == Termination::line_search_failure) {
      // With approximate curvature the line search can stall before tol_g. The inner loop
      // still counts as finished when it moved; a loop that accepted no step ends the solve.
      ++report.inner_line_search_failures;
      if (report.proxy_history.back().size() <= 1 || problem.constraints.empty()) {
        report.termination = inner;
        break;
      }
    }
    if (problem.constraints.empty()) {
      report.termination = inner;
      break;
    }
    update_multipliers(problem, state, traj);
    if (violation <= config.tol_c && inner == Termination::converged) {
      report.termination = Termination::converged;
      break;
    }
    if (violation > previous_violation / config.violation_shrink) state.rho = std::min(config.rho_max, state.rho * config.rho_growth);
    previous_violation = violation;
  }
  state.inner_iterations = report.inner_iterations;
  report.outer_iterations = state.outer_iterations;
  report.kkt_residual = kkt_residual(problem, state, traj);
  if (report.termination == Termination::max_iterations && report.message.empty()) {
    std::ostringstream os;
    os << "stopped after " << report.outer_iterations << " outer iterations with violation "
       << report.violation_history.back();
    report.message = os.str();
  }
  report.trajectory = std::move(traj);
  return report;
}

}  // namespace gnh
