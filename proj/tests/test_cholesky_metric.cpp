#include "doctest.h"

#include "gnh/chain_library.hpp"
#include "gnh/cholesky_metric.hpp"
#include "gnh/errors.hpp"

#include <cmath>
#include <random>

using namespace gnh;

namespace {

// phi(q) = (q, q^2 / sqrt(2)) in 1-D has pullback metric 1 + q^2.
struct Parabola final : TaskMap {
  int input_dim() const override { return 1; }
  int output_dim() const override { return 2; }
  VectorXd map(const VectorXd& q) const override { return Eigen::Vector2d(q(0), q(0) * q(0) / std::sqrt(2.0)); }
  MatrixXd jacobian(const VectorXd& q) const override { return Eigen::Vector2d(1.0, std::sqrt(2.0) * q(0)); }
};

// A 2-D embedding into R^3 and its pullback J^T J.
struct Bowl final : TaskMap {
  int input_dim() const override { return 2; }
  int output_dim() const override { return 3; }
  VectorXd map(const VectorXd& q) const override {
    return Eigen::Vector3d(q(0), q(1), 0.5 * (q(0) * q(0) + 0.5 * q(1) * q(1)) + 0.3 * std::sin(q(0) * q(1)));
  }
  MatrixXd jacobian(const VectorXd& q) const override {
    MatrixXd j = MatrixXd::Zero(3, 2);
    j(0, 0) = 1.0;
    j(1, 1) = 1.0;
    j(2, 0) = q(0) + 0.3 * q(1) * std::cos(q(0) * q(1));
    j(2, 1) = 0.5 * q(1) + 0.3 * q(0) * std::cos(q(0) * q(1));
    return j;
  }
};

std::shared_ptr<MetricField> pullback(std::shared_ptr<const TaskMap> phi) {
  return std::make_shared<FunctionMetric>(phi->input_dim(), [phi](const VectorXd& q) {
    const MatrixXd j = phi->jacobian(q);
    return MatrixXd(j.transpose() * j);
  });
}

// Explicit-map gradient and GN Hessian of 1/2 |phi(q1) - phi(q0)|^2.
std::pair<VectorXd, MatrixXd> explicit_quantities(const TaskMap& phi, const VectorXd& q0, const VectorXd& q1) {
  const VectorXd r = phi.map(q1) - phi.map(q0);
  MatrixXd j(phi.output_dim(), 2 * phi.input_dim());
  j << -phi.jacobian(q0), phi.jacobian(q1);
  return {j.transpose() * r, j.transpose() * j};
}

}  // namespace

TEST_CASE("Cholesky factor examples") {
  CHECK(cholesky_factor(MatrixXd::Identity(3, 3)).upper.isIdentity());
  const auto f = cholesky_factor(Eigen::Vector2d(4, 9).asDiagonal().toDenseMatrix());
  CHECK((f.upper - MatrixXd(Eigen::Vector2d(2, 3).asDiagonal())).norm() == 0.0);

  std::mt19937_64 rng(6);
  std::normal_distribution<double> n(0.0, 1.0);
  MatrixXd b(5, 5);
  for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = n(rng);
  const MatrixXd a = b * b.transpose() + 0.1 * MatrixXd::Identity(5, 5);
  const MatrixXd c = cholesky_factor(a).upper;
  CHECK((c.transpose() * c - a).norm() / a.norm() < 1e-12);
  CHECK(c.isUpperTriangular());

  CHECK_THROWS_AS(cholesky_factor(-MatrixXd::Identity(2, 2)), NumericalError);
  MatrixXd asym = MatrixXd::Identity(2, 2);
  asym(0, 1) = 0.5;
  CHECK_THROWS_AS(cholesky_factor(asym), std::invalid_argument);
}

TEST_CASE("metric velocity gradient") {
  const Eigen::Matrix2d a{{2.0, 0.3}, {0.3, 1.0}};
  const FunctionMetric constant(2, [a](const VectorXd&) { return MatrixXd(a); });
  const VectorXd q0 = Eigen::Vector2d(0.1, -0.2), q1 = Eigen::Vector2d(0.4, 0.5);
  CHECK(metric_velocity_gradient(constant, q0, q0).isZero());

  const VectorXd g = metric_velocity_gradient(constant, q0, q1);
  const VectorXd dq = q1 - q0;
  CHECK((g.head(2) + a * dq).norm() < 1e-15);
  CHECK((g.tail(2) - a * dq).norm() < 1e-15);

  // explicit linear map with the same pullback
  const MatrixXd l = cholesky_factor(a).upper;
  const AffineMap lin(l, VectorXd::Zero(2));
  CHECK((g - explicit_quantities(lin, q0, q1).first).norm() < 1e-12);

  const auto parabola = std::make_shared<Parabola>();
  const auto metric = pullback(parabola);
  const VectorXd p0 = VectorXd::Constant(1, 0.5), p1 = VectorXd::Constant(1, 0.501);
  const VectorXd approx = metric_velocity_gradient(*metric, p0, p1);
  const VectorXd exact = explicit_quantities(*parabola, p0, p1).first;
  CHECK((approx - exact).norm() < 1e-5);
}

TEST_CASE("metric velocity Gauss-Newton Hessian") {
  const Eigen::Matrix2d a{{2.0, 0.3}, {0.3, 1.0}};
  const FunctionMetric constant(2, [a](const VectorXd&) { return MatrixXd(a); });
  MatrixXd block(4, 4);
  block << a, -a, -a, a;
  const VectorXd q0 = Eigen::Vector2d(0.1, -0.2), q1 = Eigen::Vector2d(0.4, 0.5);
  CHECK((metric_velocity_gn_hessian(constant, q0, q1) - block).norm() < 1e-14);

  const auto bowl = std::make_shared<Bowl>();
  const auto metric = pullback(bowl);
  const MatrixXd a0 = metric->evaluate(q0);
  MatrixXd same(4, 4);
  same << a0, -a0, -a0, a0;
  CHECK((metric_velocity_gn_hessian(*metric, q0, q0) - same).norm() < 1e-14);

  const VectorXd step = Eigen::Vector2d(0.6, 0.8) * 1e-2;
  const MatrixXd h = explicit_quantities(*bowl, q0, q0 + step).second;
  CHECK((metric_velocity_gn_hessian(*metric, q0, q0 + step) - h).norm() <= 1e-2 * h.norm());
}

TEST_CASE("approximation error shrinks with spacing") {
  const auto bowl = std::make_shared<Bowl>();
  const auto metric = pullback(bowl);
  const VectorXd q0 = Eigen::Vector2d(0.3, -0.4);
  const VectorXd dir = Eigen::Vector2d(1.0, 2.0).normalized();
  double prev_g = INFINITY, prev_h = INFINITY;
  for (double s : {1e-1, 1e-2, 1e-3}) {
    const VectorXd q1 = q0 + s * dir;
    const auto [g, h] = explicit_quantities(*bowl, q0, q1);
    const double eg = (metric_velocity_gradient(*metric, q0, q1) - g).norm() / g.norm();
    const double eh = (metric_velocity_gn_hessian(*metric, q0, q1) - h).norm() / h.norm();
    CHECK(eg < prev_g);
    CHECK(eh < prev_h);
    prev_g = eg;
    prev_h = eh;
  }
}

TEST_CASE("metric velocity term") {
  const Eigen::Matrix2d a{{2.0, 0.3}, {0.3, 1.0}};
  const auto constant = std::make_shared<FunctionMetric>(2, [a](const VectorXd&) { return MatrixXd(a); });
  const double dt = 0.1, w = 1.7;
  const MetricVelocityTerm term(constant, w, dt);
  const Trajectory traj(3, dt, Eigen::Vector2d(0, 0), {Eigen::Vector2d(0.1, 0.2), Eigen::Vector2d(0.3, 0.1),
                                                      Eigen::Vector2d(0.2, 0.4)}, Eigen::Vector2d(0.5, 0.5));
  const CliqueIndexing idx(1, 3);
  const auto c = make_clique(traj, 2, idx);
  const VectorXd dq = c.config(1) - c.config(0);
  CHECK(term.value(c) == doctest::Approx(0.5 * w * dq.dot(a * dq) / dt).epsilon(1e-14));
  CHECK(gradient_check(term, c) < 1e-8);

  const auto exact = squared_derivative_term(std::make_shared<AffineMap>(cholesky_factor(a).upper, VectorXd::Zero(2)),
                                             1, w, dt);
  const auto e = exact->evaluate(c, true, true);
  const auto m = term.evaluate(c, true, true);
  CHECK((m.gradient - e.gradient).norm() <= 1e-12 * e.gradient.norm());
  CHECK((m.hessian - e.hessian).norm() <= 1e-12 * e.hessian.norm());
}

TEST_CASE("inertia metric on the arm") {
  auto arm = std::make_shared<const KinematicChain>(chains::generic_arm8());
  const InertiaMetric metric(arm, 1e-8);
  const VectorXd q = chains::generic_arm8_default_posture();
  const MatrixXd m = metric.evaluate(q);
  CHECK((m - inertia_matrix(*arm, q) - 1e-8 * MatrixXd::Identity(8, 8)).norm() < 1e-15);
  CHECK_NOTHROW(cholesky_factor(m));
  // the first joint axis is vertical, the upper arm is near the axis but not on it
  CHECK_THROWS_AS(cholesky_factor(inertia_matrix(*arm, VectorXd::Zero(8))), NumericalError);
}
