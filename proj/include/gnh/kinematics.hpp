#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gnh {

using Eigen::Matrix3d;
using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXd;

struct RigidTransform {
  Matrix3d rotation = Matrix3d::Identity();
  Vector3d translation = Vector3d::Zero();
};

/// Revolute joint. `origin` maps the parent link frame to the joint frame; the joint
/// then rotates about `axis` (unit, expressed in the joint frame).
struct Joint {
  std::string name;
  RigidTransform origin;
  Vector3d axis = Vector3d::UnitZ();
  double lower = -3.14159265358979323846;
  double upper = 3.14159265358979323846;
};

enum class ShapeKind { none, cylinder, box, sphere };

/// Uniform-density solid in principal coordinates. Cylinders are aligned with e_1.
struct Shape {
  ShapeKind kind = ShapeKind::none;
  double length = 0.0;
  double radius = 0.0;
  Vector3d extents = Vector3d::Zero();  ///< box edge lengths along e_1, e_2, e_3
};

/// Rigid body with distributional inertia diagonal b along its principal axes.
struct RigidBodySpec {
  std::string name;
  double mass = 0.0;
  Vector3d b = Vector3d::Zero();
  int link = -1;                       ///< -1 is the base
  Vector3d com = Vector3d::Zero();     ///< in link coordinates
  Matrix3d axes = Matrix3d::Identity();  ///< columns e_1*, e_2*, e_3* in link coordinates
  Shape shape;
};

/// b-values of a uniform solid: cylinder (M L^2/12, M r^2/4, M r^2/4),
/// box (M a_i^2 / 12), sphere (M r^2 / 5).
Vector3d distributional_diagonal(const Shape& shape, double mass);

RigidBodySpec make_body(std::string name, double mass, const Shape& shape, int link, const Vector3d& com,
                        const Matrix3d& axes);

struct NamedFrame {
  std::string name;
  int link = -1;
  Vector3d point = Vector3d::Zero();
};

class KinematicChain {
 public:
  KinematicChain() = default;

  int add_joint(Joint joint);
  int add_body(RigidBodySpec body);
  void add_frame(NamedFrame frame);

  int dof() const { return static_cast<int>(joints_.size()); }
  const std::vector<Joint>& joints() const { return joints_; }
  const std::vector<RigidBodySpec>& bodies() const { return bodies_; }
  const std::vector<NamedFrame>& frames() const { return frames_; }

  const NamedFrame& frame(const std::string& name) const;
  bool has_frame(const std::string& name) const;

  VectorXd lower_limits() const;
  VectorXd upper_limits() const;

 private:
  std::vector<Joint> joints_;
  std::vector<RigidBodySpec> bodies_;
  std::vector<NamedFrame> frames_;
};

struct FramePose {
  Vector3d origin = Vector3d::Zero();
  Matrix3d axes = Matrix3d::Identity();
};

/// World quantities of every link, joint, body and named frame at one configuration.
struct ChainPoses {
  std::vector<FramePose> links;          ///< frame after joint i
  std::vector<Vector3d> joint_axes;      ///< world joint axes a_j
  std::vector<Vector3d> joint_origins;   ///< world joint origins o_j
  std::vector<FramePose> bodies;         ///< center of mass + principal axes
  std::vector<Vector3d> frames;          ///< named frame points

  FramePose link_pose(int link) const { return link < 0 ? FramePose{} : links[static_cast<std::size_t>(link)]; }
};

ChainPoses forward_kinematics(const KinematicChain& chain, const VectorXd& q);

/// World position of a point fixed to `link`.
Vector3d point_position(const ChainPoses& poses, int link, const Vector3d& local);

/// 3 x d Jacobian of a point fixed to `link` (columns a_j x (p - o_j) for ancestor joints).
MatrixXd jacobian_point(const KinematicChain& chain, const ChainPoses& poses, int link, const Vector3d& world_point);
MatrixXd jacobian_point(const KinematicChain& chain, const VectorXd& q, const std::string& frame);

/// 3 x d Jacobian of principal axis `axis` (0-based) of body `body`.
MatrixXd jacobian_axis(const KinematicChain& chain, const ChainPoses& poses, int body, int axis);

/// 3 x d angular velocity Jacobian of `link` (columns a_j for ancestor joints).
MatrixXd jacobian_angular(const KinematicChain& chain, const ChainPoses& poses, int link);

/// Rigid body inertial map: per body (sqrt(M) x_c, sqrt(b_1) e_1, sqrt(b_2) e_2, sqrt(b_3) e_3).
VectorXd inertial_map(const KinematicChain& chain, const VectorXd& q);
MatrixXd inertial_map_jacobian(const KinematicChain& chain, const VectorXd& q);

/// Same energy from the nine-number form: e_3 is rebuilt as e_1 x e_2.
double minimal_kinetic_energy(const KinematicChain& chain, const VectorXd& q, const VectorXd& qdot);

/// M(q) = J_K^T J_K.
MatrixXd inertia_matrix(const KinematicChain& chain, const VectorXd& q);

struct DistributionalInertia {
  Matrix3d matrix;
  bool realizable = true;  ///< false when a diagonal entry is negative
};

/// B_ii = (I_jj + I_kk - I_ii) / 2, B_ij = -I_ij.
DistributionalInertia distributional_from_traditional(const Matrix3d& inertia);
/// I_ii = B_jj + B_kk, I_ij = -B_ij.
Matrix3d traditional_from_distributional(const Matrix3d& distributional);

/// Opt-in helper: eigen-decompose a full B into (b, principal axes) with a right-handed basis.
std::pair<Vector3d, Matrix3d> principal_axes(const Matrix3d& distributional);

/// Uniformly sampled points of a shape in principal center-of-mass coordinates.
std::vector<Vector3d> sample_shape(const Shape& shape, int n, std::uint64_t seed);

/// Monte-Carlo kinetic energy 1/2 * integral rho |x_dot|^2 of a uniform body moving with
/// center velocity `v` and angular velocity `omega` (world). Test oracle only.
double sampled_energy_oracle(const RigidBodySpec& body, const FramePose& pose, const Vector3d& v,
                             const Vector3d& omega, int n_samples, std::uint64_t seed);

}  // namespace gnh
