#include "doctest.h"

#include "gnh/chain_library.hpp"
#include "gnh/optimizer.hpp"

#include <random>

using namespace gnh;

namespace {

bool monotone(const std::vector<double>& h) {
  for (std::size_t i = 1; i < h.size(); ++i)
    if (h[i] > h[i - 1]) return false;
  return true;
}

Clique random_clique(int K, int T, int d, double dt, std::uint64_t seed, int t) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  std::vector<VectorXd> states;
  auto rq = [&] {
    VectorXd q(d);
    for (int i = 0; i < d; ++i) q(i) = u(rng);
    return q;
  };
  for (int i = 0; i < T; ++i) states.push_back(rq());
  const VectorXd prefix = rq(), suffix = rq();
  return make_clique(Trajectory(T, dt, prefix, states, suffix), t, CliqueIndexing(K, T));
}

Problem reach(const Vector3d& goal, bool with_obstacle, const Vector3d& center, double radius) {
  auto arm = std::make_shared<const KinematicChain>(chains::generic_arm8());
  const double dt = 0.05;
  const VectorXd start = chains::generic_arm8_default_posture();
  Problem p{Trajectory::constant(20, dt, start), config_penalty_terms(8, 0.0, 1e-3, dt), {}};
  p.terms.push_back(posture_term(start, 1e-2));
  p.terms.push_back(kinetic_energy_term(arm, 10.0, dt));
  p.constraints.push_back(goal_constraint(arm, "ee", goal));
  if (with_obstacle) p.constraints.push_back(obstacle_constraint(arm, "ee", center, radius, 0.01));
  return p;
}

Vector3d ee(const VectorXd& q) {
  static const auto arm = chains::generic_arm8();
  return PointMap(std::make_shared<const KinematicChain>(arm), "ee").map(q);
}

}  // namespace

TEST_CASE("posture-only objective converges in one Newton step") {
  const VectorXd def = Eigen::Vector3d(0.3, -0.2, 1.0);
  const Problem p{Trajectory::constant(5, 0.1, VectorXd::Zero(3)), {posture_term(def, 2.0)}, {}};
  const auto r = augmented_lagrangian_solve(p);
  CHECK(r.termination == Termination::converged);
  CHECK(r.inner_iterations == 1);
  for (int i = 1; i <= 6; ++i) CHECK((r.trajectory.config(i) - def).norm() < 1e-12);
}

TEST_CASE("zero-weight objective leaves the trajectory unchanged") {
  const Trajectory init = Trajectory::constant(4, 0.1, VectorXd::LinSpaced(2, -1, 1));
  Problem p{init, {posture_term(VectorXd::Zero(2), 0.0)}, {}};
  const auto r = augmented_lagrangian_solve(p);
  CHECK(r.termination == Termination::converged);
  CHECK(r.trajectory.variables() == init.variables());
}

TEST_CASE("planar end-effector velocity with posture") {
  auto chain = std::make_shared<const KinematicChain>(chains::planar_two_link());
  const double dt = 0.1;
  std::vector<VectorXd> states;
  for (int i = 1; i <= 10; ++i) states.push_back(Eigen::Vector2d(0.2 * i, -0.1 * i));
  const Trajectory init(10, dt, Eigen::Vector2d(0, 0), states, Eigen::Vector2d(2.0, -1.0));
  const Problem p{init,
                  {squared_derivative_term(std::make_shared<PointMap>(chain, "ee"), 1, 1.0, dt),
                   posture_term(Eigen::Vector2d(0.5, 0.5), 0.1)},
                  {}};
  const auto r = augmented_lagrangian_solve(p);
  CHECK(r.termination == Termination::converged);
  CHECK(r.final_gradient_norm <= 1e-6);
  CHECK(r.inner_iterations <= 25);
  for (const auto& h : r.proxy_history) CHECK(monotone(h));
}

TEST_CASE("equality-constrained quadratic has the closed-form solution") {
  const VectorXd def = Eigen::Vector3d(0.4, -0.3, 0.9);
  const double c = 1.25;
  Problem p{Trajectory::constant(3, 0.1, VectorXd::Zero(3)), {posture_term(def, 1.0)},
            {std::make_shared<CoordinateConstraint>(0, c)}};
  const auto r = augmented_lagrangian_solve(p);
  CHECK(r.termination == Termination::converged);
  VectorXd expected = def;
  expected(0) = c;
  for (int i = 1; i <= 4; ++i) CHECK((r.trajectory.config(i) - expected).norm() <= 1e-6);
  CHECK(r.violation_history.back() <= 1e-6);
  CHECK(r.kkt_residual <= 1e-5);
  for (const auto& h : r.proxy_history) CHECK(monotone(h));
}

TEST_CASE("inactive inequality keeps zero multipliers") {
  const VectorXd def = Eigen::Vector2d(0.2, -0.1);
  Problem p{Trajectory::constant(4, 0.1, VectorXd::Zero(2)), {posture_term(def, 1.0)},
            {joint_limit_constraints(VectorXd::Constant(2, -1.0), VectorXd::Constant(2, 1.0))}};
  const auto r = augmented_lagrangian_solve(p);
  CHECK(r.termination == Termination::converged);
  for (int i = 1; i <= 5; ++i) CHECK((r.trajectory.config(i) - def).norm() < 1e-10);
  for (const auto& per_clique : r.state.multipliers)
    for (const auto& m : per_clique) CHECK(m.isZero());
}

TEST_CASE("joint limits repair an out-of-bounds initializer") {
  const VectorXd lo = VectorXd::Constant(2, -0.5), hi = VectorXd::Constant(2, 0.5);
  Problem p{Trajectory::constant(4, 0.1, Eigen::Vector2d(1.5, -2.0)), {posture_term(Eigen::Vector2d(0.9, 0.0), 1.0)},
            {joint_limit_constraints(lo, hi)}};
  p.terms.push_back(config_penalty_terms(2, 0.1, 0.0, 0.1)[0]);
  const auto r = augmented_lagrangian_solve(p);
  CHECK(r.violation_history.back() <= 1e-6);
  for (int i = 1; i <= 5; ++i) {
    const VectorXd q = r.trajectory.config(i);
    CHECK(((q.array() <= hi.array() + 1e-6) && (q.array() >= lo.array() - 1e-6)).all());
  }
}

TEST_CASE("constraint examples") {
  auto arm = std::make_shared<const KinematicChain>(chains::planar_two_link());
  const CliqueIndexing idx(0, 2);
  Clique c;
  c.q = Eigen::Vector2d(0, 0);
  c.d = 2;
  c.indexing = idx;
  c.t = 1;

  CHECK(ObstacleConstraint(arm, "ee", Vector3d(5, 5, 0), 0.5, 0.1).evaluate(c, false, false).values(0) < 0.0);
  CHECK(ObstacleConstraint(arm, "ee", Vector3d(2.6, 0, 0), 0.5, 0.1).evaluate(c, false, false).values(0) ==
        doctest::Approx(0.0).epsilon(1e-15));

  CHECK(GoalConstraint(arm, "ee", Vector3d(2, 0, 0)).evaluate(c, false, false).values(0) == 0.0);
  const auto g = GoalConstraint(arm, "ee", Vector3d(2, 0.1, 0)).evaluate(c, true, true);
  CHECK(g.values(0) == doctest::Approx(0.01));
  const MatrixXd j = jacobian_point(*arm, c.q, "ee");
  CHECK((g.jacobian.transpose() - 2.0 * j.transpose() * Vector3d(0, -0.1, 0)).norm() < 1e-15);

  const auto limits = JointLimitConstraint(VectorXd::Constant(2, -1.0), VectorXd::Constant(2, 1.0));
  CHECK((limits.evaluate(c, false, false).values.array() < 0.0).all());
  c.q = Eigen::Vector2d(1.0, -1.0);
  const VectorXd at = limits.evaluate(c, false, false).values;
  CHECK(at.maxCoeff() == 0.0);
  CHECK((at.array() == 0.0).count() == 2);
}

TEST_CASE("constraint Jacobians match FD") {
  auto arm = std::make_shared<const KinematicChain>(chains::generic_arm8());
  const ObstacleConstraint obstacle(arm, "ee", Vector3d(0.5, 0.2, 0.8), 0.1, 0.02);
  const GoalConstraint goal(arm, "ee", Vector3d(0.6, 0.0, 0.5));
  const JointLimitConstraint limits(arm->lower_limits(), arm->upper_limits());
  for (int s = 0; s < 20; ++s) {
    for (int t : {1, 5}) {
      const auto c = random_clique(0, 5, 8, 0.1, 100 + s, t);
      CHECK(constraint_jacobian_check(obstacle, c) < 1e-5);
      CHECK(constraint_jacobian_check(goal, c) < 1e-5);
      CHECK(constraint_jacobian_check(limits, c) < 1e-5);
    }
  }
}

TEST_CASE("reach with a sphere obstacle") {
  const VectorXd start = chains::generic_arm8_default_posture();
  const Vector3d from = ee(start);
  const Vector3d goal = from + Vector3d(0.1, 0.15, 0.12);
  const Vector3d center = 0.5 * (from + goal) + Vector3d(0.0, 0.02, -0.02);
  const double radius = 0.05;
  const auto r = augmented_lagrangian_solve(reach(goal, true, center, radius));
  CHECK(r.termination != Termination::solver_failure);
  CHECK(r.termination != Termination::line_search_failure);
  CHECK(r.violation_history.back() <= 1e-4);
  for (int i = 1; i <= 21; ++i) CHECK((ee(r.trajectory.config(i)) - center).norm() >= radius + 0.01 - 1e-4);
  CHECK((ee(r.trajectory.config(20)) - goal).norm() <= 1e-2);
  for (const auto& h : r.proxy_history) CHECK(monotone(h));
  CHECK(r.condition_estimates.size() == r.regularization_shifts.size());
}

TEST_CASE("solves are deterministic") {
  const VectorXd start = chains::generic_arm8_default_posture();
  const Vector3d goal = ee(start) + Vector3d(-0.1, 0.1, 0.05);
  const auto a = augmented_lagrangian_solve(reach(goal, false, Vector3d::Zero(), 1.0));
  const auto b = augmented_lagrangian_solve(reach(goal, false, Vector3d::Zero(), 1.0));
  CHECK(a.trajectory.variables() == b.trajectory.variables());
  CHECK(a.objective_history == b.objective_history);
}

TEST_CASE("an exhausted iteration budget stops without moving") {
  const Problem p{Trajectory::constant(3, 0.1, VectorXd::Zero(2)), {posture_term(VectorXd::Ones(2), 1.0)}, {}};
  OptimizerConfig cfg;
  cfg.max_inner = 0;
  const auto r = augmented_lagrangian_solve(p, cfg);
  CHECK(r.termination == Termination::max_iterations);
  CHECK(r.trajectory.variables().isZero());
}
