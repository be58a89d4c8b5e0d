#include "gnh/chain_library.hpp"

namespace gnh::chains {

namespace {

Joint revolute(std::string name, const Vector3d& axis, const Vector3d& offset, double limit) {
  Joint j;
  j.name = std::move(name);
  j.axis = axis;
  j.origin.translation = offset;
  j.lower = -limit;
  j.upper = limit;
  return j;
}

// principal axis e_1 along the link's z
Matrix3d along_z() {
  Matrix3d axes;
  axes.col(0) = Vector3d::UnitZ();
  axes.col(1) = Vector3d::UnitX();
  axes.col(2) = Vector3d::UnitY();
  return axes;
}

}  // namespace

Shape arm_cylinder() {
  Shape s;
  s.kind = ShapeKind::cylinder;
  s.length = 0.5;
  s.radius = 0.12;
  return s;
}

KinematicChain planar_two_link(double link_length) {
  KinematicChain chain;
  chain.add_joint(revolute("j1", Vector3d::UnitZ(), Vector3d::Zero(), 3.2));
  chain.add_joint(revolute("j2", Vector3d::UnitZ(), Vector3d(link_length, 0, 0), 3.2));
  chain.add_frame({"ee", 1, Vector3d(link_length, 0, 0)});
  return chain;
}

KinematicChain pendulum(double mass, double length) {
  KinematicChain chain;
  chain.add_joint(revolute("j1", Vector3d::UnitZ(), Vector3d::Zero(), 3.2));
  Shape point;
  point.kind = ShapeKind::sphere;
  point.radius = 1e-6;
  chain.add_body(make_body("bob", mass, point, 0, Vector3d(length, 0, 0), Matrix3d::Identity()));
  chain.add_frame({"bob", 0, Vector3d(length, 0, 0)});
  return chain;
}

KinematicChain generic_arm8() {
  KinematicChain chain;
  const Vector3d z = Vector3d::UnitZ();
  const Vector3d y = Vector3d::UnitY();
  chain.add_joint(revolute("base_yaw", z, Vector3d(0, 0, 0.30), 2.9));
  chain.add_joint(revolute("shoulder_pitch", y, Vector3d(0, 0, 0.0), 2.0));
  chain.add_joint(revolute("upper_arm_roll", z, Vector3d(0, 0, 0.25), 2.9));
  chain.add_joint(revolute("elbow_pitch", y, Vector3d(0, 0, 0.25), 2.0));
  chain.add_joint(revolute("forearm_roll", z, Vector3d(0, 0, 0.25), 2.9));
  chain.add_joint(revolute("wrist_pitch", y, Vector3d(0, 0, 0.25), 2.0));
  chain.add_joint(revolute("wrist_roll", z, Vector3d(0, 0, 0.10), 2.9));
  chain.add_joint(revolute("hand_pitch", y, Vector3d(0, 0, 0.05), 2.0));

  Shape hand = arm_cylinder();
  chain.add_body(make_body("upper_arm", 9.0, arm_cylinder(), 2, Vector3d::Zero(), along_z()));
  chain.add_body(make_body("forearm", 9.0, arm_cylinder(), 4, Vector3d::Zero(), along_z()));
  chain.add_body(make_body("hand", 0.9, hand, 7, Vector3d(0, 0, 0.10), along_z()));
  chain.add_frame({"ee", 7, Vector3d(0, 0, 0.15)});
  chain.add_frame({"elbow", 3, Vector3d::Zero()});
  chain.add_frame({"wrist", 5, Vector3d::Zero()});
  return chain;
}

VectorXd generic_arm8_default_posture() {
  VectorXd q(8);
  q << 0.0, 0.4, 0.0, 1.2, 0.0, 0.6, 0.0, 0.0;
  return q;
}

KinematicChain cylinder_arm3() {
  KinematicChain chain;
  chain.add_joint(revolute("shoulder_yaw", Vector3d::UnitZ(), Vector3d(0, 0, 0.3), 3.2));
  chain.add_joint(revolute("shoulder_pitch", Vector3d::UnitY(), Vector3d::Zero(), 3.2));
  chain.add_joint(revolute("elbow_pitch", Vector3d::UnitY(), Vector3d(0, 0, 0.5), 3.2));
  chain.add_body(make_body("upper_arm", 9.0, arm_cylinder(), 1, Vector3d(0, 0, 0.25), along_z()));
  chain.add_body(make_body("forearm", 9.0, arm_cylinder(), 2, Vector3d(0, 0, 0.25), along_z()));
  chain.add_body(make_body("hand", 0.9, arm_cylinder(), 2, Vector3d(0, 0, 0.6), along_z()));
  chain.add_frame({"ee", 2, Vector3d(0, 0, 0.7)});
  return chain;
}

}  // namespace gnh::chains
