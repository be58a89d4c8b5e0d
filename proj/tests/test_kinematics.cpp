#include "doctest.h"

#include "gnh/chain_io.hpp"
#include "gnh/chain_library.hpp"
#include "gnh/errors.hpp"
#include "gnh/kinematics.hpp"
#include "gnh/objective.hpp"

#include <cmath>
#include <random>

using namespace gnh;

namespace {

constexpr double kPi = 3.14159265358979323846;

VectorXd random_q(std::mt19937_64& rng, int d, double spread = 1.5) {
  std::uniform_real_distribution<double> u(-spread, spread);
  VectorXd q(d);
  for (int i = 0; i < d; ++i) q(i) = u(rng);
  return q;
}

Vector3d ee(const KinematicChain& chain, const VectorXd& q) {
  const auto& f = chain.frame("ee");
  return point_position(forward_kinematics(chain, q), f.link, f.point);
}

double body_energy_mc(const KinematicChain& chain, const VectorXd& q, const VectorXd& qdot, int n, std::uint64_t seed) {
  const auto poses = forward_kinematics(chain, q);
  double e = 0.0;
  for (std::size_t b = 0; b < chain.bodies().size(); ++b) {
    const auto& body = chain.bodies()[b];
    const Vector3d v = jacobian_point(chain, poses, body.link, poses.bodies[b].origin) * qdot;
    const Vector3d w = jacobian_angular(chain, poses, body.link) * qdot;
    e += sampled_energy_oracle(body, poses.bodies[b], v, w, n, seed + b);
  }
  return e;
}

}  // namespace

TEST_CASE("planar forward kinematics") {
  const auto chain = chains::planar_two_link();
  CHECK((ee(chain, Eigen::Vector2d(0, 0)) - Vector3d(2, 0, 0)).norm() < 1e-15);
  CHECK((ee(chain, Eigen::Vector2d(kPi / 2, 0)) - Vector3d(0, 2, 0)).norm() < 1e-15);
  const Vector3d expected(std::cos(kPi / 4) + std::cos(kPi / 2), std::sin(kPi / 4) + std::sin(kPi / 2), 0.0);
  const Vector3d p = ee(chain, Eigen::Vector2d(kPi / 4, kPi / 4));
  CHECK((p - expected).norm() < 1e-15);
  CHECK(p.x() == doctest::Approx(0.7071).epsilon(1e-4));
  CHECK(p.y() == doctest::Approx(1.7071).epsilon(1e-4));
}

TEST_CASE("point Jacobians") {
  const auto chain = chains::planar_two_link();
  const MatrixXd j = jacobian_point(chain, Eigen::Vector2d(0, 0), "ee");
  CHECK((j.col(0) - Vector3d(0, 2, 0)).norm() < 1e-15);
  CHECK((j.col(1) - Vector3d(0, 1, 0)).norm() < 1e-15);

  const auto arm = chains::generic_arm8();
  const auto poses = forward_kinematics(arm, VectorXd::Constant(8, 0.3));
  CHECK(jacobian_point(arm, poses, -1, Vector3d(1, 2, 3)).isZero());

  std::mt19937_64 rng(11);
  auto shared = std::make_shared<const KinematicChain>(arm);
  for (int i = 0; i < 20; ++i) {
    const VectorXd q = random_q(rng, 8);
    CHECK(jacobian_check(PointMap(shared, "ee"), q) < 1e-6);
    CHECK(jacobian_check(InertialMap(shared), q) < 1e-6);
  }
}

TEST_CASE("axis Jacobians") {
  KinematicChain one;
  one.add_joint(Joint{});
  one.add_body(make_body("rod", 1.0, chains::arm_cylinder(), 0, Vector3d::Zero(), Matrix3d::Identity()));
  one.add_body(make_body("base", 1.0, chains::arm_cylinder(), -1, Vector3d::Zero(), Matrix3d::Identity()));
  const auto poses = forward_kinematics(one, VectorXd::Zero(1));
  CHECK((jacobian_axis(one, poses, 0, 0) - Vector3d::UnitY()).norm() < 1e-15);
  CHECK(jacobian_axis(one, poses, 1, 0).isZero());

  // FD of the axis trajectory on the arm
  const auto arm = chains::generic_arm8();
  std::mt19937_64 rng(4);
  const double h = 1e-6;
  for (int s = 0; s < 20; ++s) {
    const VectorXd q = random_q(rng, 8);
    const auto p = forward_kinematics(arm, q);
    for (int body = 0; body < 3; ++body)
      for (int axis = 0; axis < 3; ++axis) {
        const MatrixXd j = jacobian_axis(arm, p, body, axis);
        MatrixXd fd(3, 8);
        for (int c = 0; c < 8; ++c) {
          VectorXd qp = q, qm = q;
          qp(c) += h;
          qm(c) -= h;
          fd.col(c) = (forward_kinematics(arm, qp).bodies[body].axes.col(axis) -
                       forward_kinematics(arm, qm).bodies[body].axes.col(axis)) / (2 * h);
        }
        CHECK((fd - j).cwiseAbs().maxCoeff() < 1e-6);
      }
  }
}

TEST_CASE("inertial map of a static body") {
  KinematicChain c;
  RigidBodySpec b;
  b.mass = 4.0;
  b.b = Vector3d(1, 1, 1);
  b.link = -1;
  c.add_body(b);
  VectorXd expected(12);
  expected << 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1;
  CHECK((inertial_map(c, VectorXd::Zero(0)) - expected).norm() == 0.0);
}

TEST_CASE("cylinder distributional inertia") {
  const Vector3d b = distributional_diagonal(chains::arm_cylinder(), 9.0);
  CHECK(b(0) == doctest::Approx(9.0 * 0.25 / 12.0).epsilon(1e-15));
  CHECK(b(0) == doctest::Approx(0.1875));
  CHECK(b(1) == doctest::Approx(0.0324));
  CHECK(b(2) == doctest::Approx(0.0324));

  // spin about a transverse axis: K = 1/2 (b1 + b2) w^2 = 1/2 I_trans w^2
  const double i_trans = 9.0 * (0.12 * 0.12 / 4.0 + 0.25 / 12.0);
  CHECK(b(0) + b(1) == doctest::Approx(i_trans).epsilon(1e-14));
  CHECK(i_trans == doctest::Approx(0.2199).epsilon(1e-4));

  KinematicChain spin;
  Joint j;
  j.axis = Vector3d::UnitZ();
  spin.add_joint(j);
  spin.add_body(make_body("rod", 9.0, chains::arm_cylinder(), 0, Vector3d::Zero(), Matrix3d::Identity()));
  const double w = 3.0;
  const MatrixXd m = inertia_matrix(spin, VectorXd::Zero(1));
  CHECK(0.5 * m(0, 0) * w * w == doctest::Approx(0.5 * i_trans * w * w).epsilon(1e-14));
}

TEST_CASE("pendulum inertia") {
  const double m = 2.5, l = 0.8;
  const auto p = chains::pendulum(m, l);
  const MatrixXd mq = inertia_matrix(p, VectorXd::Constant(1, 0.7));
  CHECK(mq(0, 0) == doctest::Approx(m * l * l).epsilon(1e-10));
}

TEST_CASE("inertia matrix is the Gram matrix of the inertial map") {
  const auto arm = chains::generic_arm8();
  std::mt19937_64 rng(8);
  for (int s = 0; s < 10; ++s) {
    const VectorXd q = random_q(rng, 8), qd = random_q(rng, 8);
    const MatrixXd m = inertia_matrix(arm, q);
    const MatrixXd j = inertial_map_jacobian(arm, q);
    const double a = 0.5 * qd.dot(m * qd), b = 0.5 * (j * qd).squaredNorm();
    CHECK(std::abs(a - b) <= 1e-13 * b);
    CHECK((m - m.transpose()).norm() == 0.0);
    CHECK(Eigen::SelfAdjointEigenSolver<MatrixXd>(m).eigenvalues().minCoeff() >= -1e-10);
    CHECK(minimal_kinetic_energy(arm, q, qd) == doctest::Approx(b).epsilon(1e-12));
  }
}

TEST_CASE("distributional conversions") {
  const auto b = distributional_from_traditional(Eigen::Vector3d(2, 3, 4).asDiagonal());
  CHECK(b.matrix == Matrix3d(Eigen::Vector3d(2.5, 1.5, 0.5).asDiagonal()));
  CHECK(b.realizable);
  CHECK(traditional_from_distributional(b.matrix) == Matrix3d(Eigen::Vector3d(2, 3, 4).asDiagonal()));
  CHECK(traditional_from_distributional(Matrix3d::Zero()).isZero());

  // unit ball: I = 2/5 M r^2, B_ii = integral of u_i^2 = 1/5
  const auto sphere = distributional_from_traditional(0.4 * Matrix3d::Identity());
  CHECK((sphere.matrix - 0.2 * Matrix3d::Identity()).norm() < 1e-15);
  Shape ball;
  ball.kind = ShapeKind::sphere;
  ball.radius = 1.0;
  CHECK((distributional_diagonal(ball, 1.0) - Vector3d::Constant(0.2)).norm() < 1e-15);

  Matrix3d off = Matrix3d::Identity();
  off(0, 1) = off(1, 0) = 0.1;
  CHECK(distributional_from_traditional(off).matrix(0, 1) == -0.1);

  const Matrix3d i = traditional_from_distributional(Eigen::Vector3d(0.1875, 0.0324, 0.0324).asDiagonal());
  CHECK(i(0, 0) == doctest::Approx(0.0648).epsilon(1e-12));
  CHECK(i(0, 0) == doctest::Approx(0.5 * 9.0 * 0.12 * 0.12).epsilon(1e-12));
  CHECK(i(1, 1) == doctest::Approx(0.2199).epsilon(1e-12));

  // violates the triangle inequality
  CHECK_FALSE(distributional_from_traditional(Eigen::Vector3d(1, 1, 5).asDiagonal()).realizable);
}

TEST_CASE("principal axes recover b and a right-handed basis") {
  const Matrix3d r = Eigen::AngleAxisd(0.4, Vector3d(1, 2, 3).normalized()).toRotationMatrix();
  const Matrix3d b = r * Eigen::Vector3d(0.5, 0.2, 0.1).asDiagonal() * r.transpose();
  const auto [values, axes] = principal_axes(b);
  CHECK((axes * values.asDiagonal() * axes.transpose() - b).norm() < 1e-14);
  CHECK(axes.determinant() == doctest::Approx(1.0));
}

TEST_CASE("Monte-Carlo oracle on a single cylinder") {
  const auto body = make_body("c", 9.0, chains::arm_cylinder(), -1, Vector3d::Zero(), Matrix3d::Identity());
  FramePose pose;
  const Vector3d v(0.3, -1.0, 0.5);
  const double trans = sampled_energy_oracle(body, pose, v, Vector3d::Zero(), 100000, 1);
  CHECK(trans == doctest::Approx(0.5 * 9.0 * v.squaredNorm()).epsilon(1e-10));

  const double w = 2.0;
  const double axial = sampled_energy_oracle(body, pose, Vector3d::Zero(), Vector3d(w, 0, 0), 100000, 2);
  CHECK(axial == doctest::Approx(0.5 * (0.5 * 9.0 * 0.0144) * w * w).epsilon(0.01));
  CHECK_THROWS_AS(sampled_energy_oracle(body, pose, v, Vector3d::Zero(), 10, 1), std::invalid_argument);
}

TEST_CASE("Monte-Carlo oracle matches the decomposed energy on a moving chain") {
  const auto chain = chains::cylinder_arm3();
  std::mt19937_64 rng(21);
  for (int s = 0; s < 3; ++s) {
    const VectorXd q = random_q(rng, 3), qd = random_q(rng, 3);
    const double exact = 0.5 * qd.dot(inertia_matrix(chain, q) * qd);
    CHECK(body_energy_mc(chain, q, qd, 100000, 100 + s) == doctest::Approx(exact).epsilon(0.01));
  }
}

TEST_CASE("chain files roundtrip") {
  const auto arm = chains::generic_arm8();
  const auto back = chain_from_json(chain_to_json(arm));
  CHECK(back.dof() == 8);
  CHECK(back.bodies().size() == 3);
  const VectorXd q = VectorXd::LinSpaced(8, -1, 1);
  CHECK((inertia_matrix(back, q) - inertia_matrix(arm, q)).norm() < 1e-14);
  CHECK((ee(back, q) - ee(arm, q)).norm() < 1e-15);
  CHECK(load_chain("builtin:planar_two_link").dof() == 2);
  CHECK_THROWS_AS(load_chain("builtin:nope"), ConfigError);
  CHECK_THROWS_AS(load_chain("/nonexistent/chain.json"), IoError);
  CHECK_THROWS_AS(chain_from_json(nlohmann::json{{"version", 99}}), ConfigError);
}
