#include "gnh/kinematics.hpp"

#include "gnh/errors.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <random>
#include <stdexcept>

namespace gnh {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_unit(const Vector3d& v, const char* what) {
  if (std::abs(v.norm() - 1.0) > 1e-12) throw std::invalid_argument(std::string(what) + " must be a unit vector");
}

}  // namespace

Vector3d distributional_diagonal(const Shape& shape, double mass) {
  switch (shape.kind) {
    case ShapeKind::cylinder: {
      const double r2 = shape.radius * shape.radius;
      return {mass * shape.length * shape.length / 12.0, mass * r2 / 4.0, mass * r2 / 4.0};
    }
    case ShapeKind::box:
      return mass * shape.extents.cwiseProduct(shape.extents) / 12.0;
    case ShapeKind::sphere:
      return Vector3d::Constant(mass * shape.radius * shape.radius / 5.0);
    case ShapeKind::none:
      break;
  }
  throw std::invalid_argument("distributional_diagonal: shape has no geometry");
}

RigidBodySpec make_body(std::string name, double mass, const Shape& shape, int link, const Vector3d& com,
                        const Matrix3d& axes) {
  RigidBodySpec body;
  body.name = std::move(name);
  body.mass = mass;
  body.b = distributional_diagonal(shape, mass);
  body.link = link;
  body.com = com;
  body.axes = axes;
  body.shape = shape;
  return body;
}

int KinematicChain::add_joint(Joint joint) {
  require_unit(joint.axis, "joint axis");
  if (!(joint.lower < joint.upper)) throw std::invalid_argument("joint '" + joint.name + "': lower >= upper");
  joints_.push_back(std::move(joint));
  return dof() - 1;
}

int KinematicChain::add_body(RigidBodySpec body) {
  if (!(body.mass > 0.0)) throw std::invalid_argument("body '" + body.name + "': mass must be positive");
  if ((body.b.array() < 0.0).any()) throw std::invalid_argument("body '" + body.name + "': negative b");
  if (body.link < -1 || body.link >= dof()) throw std::invalid_argument("body '" + body.name + "': unknown link");
  const Matrix3d& e = body.axes;
  if ((e.transpose() * e - Matrix3d::Identity()).norm() > 1e-10 || (e.col(0).cross(e.col(1)) - e.col(2)).norm() > 1e-10)
    throw std::invalid_argument("body '" + body.name + "': axes are not a right-handed orthonormal basis");
  bodies_.push_back(std::move(body));
  return static_cast<int>(bodies_.size()) - 1;
}

void KinematicChain::add_frame(NamedFrame frame) {
  if (frame.link < -1 || frame.link >= dof()) throw std::invalid_argument("frame '" + frame.name + "': unknown link");
  if (has_frame(frame.name)) throw std::invalid_argument("frame '" + frame.name + "' defined twice");
  frames_.push_back(std::move(frame));
}

const NamedFrame& KinematicChain::frame(const std::string& name) const {
  for (const auto& f : frames_)
    if (f.name == name) return f;
  throw std::invalid_argument("unknown frame '" + name + "'");
}

bool KinematicChain::has_frame(const std::string& name) const {
  for (const auto& f : frames_)
    if (f.name == name) return true;
  return false;
}

VectorXd KinematicChain::lower_limits() const {
  VectorXd out(dof());
  for (int i = 0; i < dof(); ++i) out[i] = joints_[static_cast<std::size_t>(i)].lower;
  return out;
}

VectorXd KinematicChain::upper_limits() const {
  VectorXd out(dof());
  for (int i = 0; i < dof(); ++i) out[i] = joints_[static_cast<std::size_t>(i)].upper;
  return out;
}

ChainPoses forward_kinematics(const KinematicChain& chain, const VectorXd& q) {
  if (q.size() != chain.dof())
    throw std::invalid_argument("forward_kinematics: expected " + std::to_string(chain.dof()) + " joint values");
  ChainPoses out;
  const auto n = static_cast<std::size_t>(chain.dof());
  out.links.resize(n);
  out.joint_axes.resize(n);
  out.joint_origins.resize(n);
  Matrix3d rot = Matrix3d::Identity();
  Vector3d pos = Vector3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Joint& j = chain.joints()[i];
    pos += rot * j.origin.translation;
    rot = rot * j.origin.rotation;
    out.joint_axes[i] = rot * j.axis;
    out.joint_origins[i] = pos;
    rot = rot * Eigen::AngleAxisd(q[static_cast<Eigen::Index>(i)], j.axis).toRotationMatrix();
    out.links[i] = {pos, rot};
  }
  for (const auto& body : chain.bodies()) {
    const FramePose link = out.link_pose(body.link);
    out.bodies.push_back({link.origin + link.axes * body.com, link.axes * body.axes});
  }
  for (const auto& f : chain.frames()) out.frames.push_back(point_position(out, f.link, f.point));
  return out;
}

Vector3d point_position(const ChainPoses& poses, int link, const Vector3d& local) {
  const FramePose p = poses.link_pose(link);
  return p.origin + p.axes * local;
}

MatrixXd jacobian_point(const KinematicChain& chain, const ChainPoses& poses, int link, const Vector3d& world_point) {
  MatrixXd jac = MatrixXd::Zero(3, chain.dof());
  for (int j = 0; j <= link; ++j)
    jac.col(j) = poses.joint_axes[static_cast<std::size_t>(j)].cross(world_point - poses.joint_origins[static_cast<std::size_t>(j)]);
  return jac;
}

MatrixXd jacobian_point(const KinematicChain& chain, const VectorXd& q, const std::string& frame) {
  const NamedFrame& f = chain.frame(frame);
  const ChainPoses poses = forward_kinematics(chain, q);
  return jacobian_point(chain, poses, f.link, point_position(poses, f.link, f.point));
}

MatrixXd jacobian_axis(const KinematicChain& chain, const ChainPoses& poses, int body, int axis) {
  if (axis < 0 || axis > 2) throw std::invalid_argument("jacobian_axis: axis index must be 0, 1 or 2");
  const RigidBodySpec& spec = chain.bodies().at(static_cast<std::size_t>(body));
  const Vector3d e = poses.bodies[static_cast<std::size_t>(body)].axes.col(axis);
  MatrixXd jac = MatrixXd::Zero(3, chain.dof());
  for (int j = 0; j <= spec.link; ++j) jac.col(j) = poses.joint_axes[static_cast<std::size_t>(j)].cross(e);
  return jac;
}

MatrixXd jacobian_angular(const KinematicChain& chain, const ChainPoses& poses, int link) {
  MatrixXd jac = MatrixXd::Zero(3, chain.dof());
  for (int j = 0; j <= link; ++j) jac.col(j) = poses.joint_axes[static_cast<std::size_t>(j)];
  return jac;
}

VectorXd inertial_map(const KinematicChain& chain, const VectorXd& q) {
  const ChainPoses poses = forward_kinematics(chain, q);
  VectorXd z(12 * static_cast<Eigen::Index>(chain.bodies().size()));
  for (std::size_t i = 0; i < chain.bodies().size(); ++i) {
    const RigidBodySpec& body = chain.bodies()[i];
    const FramePose& pose = poses.bodies[i];
    const auto o = static_cast<Eigen::Index>(12 * i);
    z.segment<3>(o) = std::sqrt(body.mass) * pose.origin;
    for (int a = 0; a < 3; ++a) z.segment<3>(o + 3 + 3 * a) = std::sqrt(body.b[a]) * pose.axes.col(a);
  }
  return z;
}

MatrixXd inertial_map_jacobian(const KinematicChain& chain, const VectorXd& q) {
  const ChainPoses poses = forward_kinematics(chain, q);
  MatrixXd jac(12 * static_cast<Eigen::Index>(chain.bodies().size()), chain.dof());
  for (std::size_t i = 0; i < chain.bodies().size(); ++i) {
    const RigidBodySpec& body = chain.bodies()[i];
    const auto o = static_cast<Eigen::Index>(12 * i);
    jac.middleRows(o, 3) = std::sqrt(body.mass) * jacobian_point(chain, poses, body.link, poses.bodies[i].origin);
    for (int a = 0; a < 3; ++a)
      jac.middleRows(o + 3 + 3 * a, 3) = std::sqrt(body.b[a]) * jacobian_axis(chain, poses, static_cast<int>(i), a);
  }
  return jac;
}

double minimal_kinetic_energy(const KinematicChain& chain, const VectorXd& q, const VectorXd& qdot) {
  const ChainPoses poses = forward_kinematics(chain, q);
  double energy = 0.0;
  for (std::size_t i = 0; i < chain.bodies().size(); ++i) {
    const RigidBodySpec& body = chain.bodies()[i];
    const Vector3d xc_dot = jacobian_point(chain, poses, body.link, poses.bodies[i].origin) * qdot;
    const Vector3d e1_dot = jacobian_axis(chain, poses, static_cast<int>(i), 0) * qdot;
    const Vector3d e2_dot = jacobian_axis(chain, poses, static_cast<int>(i), 1) * qdot;
    const Vector3d& e1 = poses.bodies[i].axes.col(0);
    const Vector3d& e2 = poses.bodies[i].axes.col(1);
    // d/dt (e1 x e2)
    const Vector3d e3_dot = e1_dot.cross(e2) + e1.cross(e2_dot);
    energy += 0.5 * body.mass * xc_dot.squaredNorm() + 0.5 * body.b[0] * e1_dot.squaredNorm() +
              0.5 * body.b[1] * e2_dot.squaredNorm() + 0.5 * body.b[2] * e3_dot.squaredNorm();
  }
  return energy;
}

MatrixXd inertia_matrix(const KinematicChain& chain, const VectorXd& q) {
  if (chain.bodies().empty()) throw std::invalid_argument("inertia_matrix: chain has no bodies");
  const MatrixXd jac = inertial_map_jacobian(chain, q);
  return jac.transpose() * jac;
}

DistributionalInertia distributional_from_traditional(const Matrix3d& inertia) {
  DistributionalInertia out;
  const double trace = inertia.trace();
  out.matrix = -inertia;
  for (int i = 0; i < 3; ++i) out.matrix(i, i) = 0.5 * (trace - 2.0 * inertia(i, i));
  out.realizable = (out.matrix.diagonal().array() >= 0.0).all();
  return out;
}

Matrix3d traditional_from_distributional(const Matrix3d& distributional) {
  Matrix3d out = -distributional;
  const double trace = distributional.trace();
  for (int i = 0; i < 3; ++i) out(i, i) = trace - distributional(i, i);
  return out;
}

std::pair<Vector3d, Matrix3d> principal_axes(const Matrix3d& distributional) {
  Eigen::SelfAdjointEigenSolver<Matrix3d> eig(distributional);
  Matrix3d axes = eig.eigenvectors();
  if (axes.determinant() < 0.0) axes.col(2) = -axes.col(2);
  return {eig.eigenvalues(), axes};
}

std::vector<Vector3d> sample_shape(const Shape& shape, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Vector3d> pts;
  pts.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    switch (shape.kind) {
      case ShapeKind::cylinder: {
        const double u = (unit(rng) - 0.5) * shape.length;
        const double r = shape.radius * std::sqrt(unit(rng));
        const double a = 2.0 * kPi * unit(rng);
        pts.emplace_back(u, r * std::cos(a), r * std::sin(a));
        break;
      }
      case ShapeKind::box:
        pts.emplace_back((unit(rng) - 0.5) * shape.extents[0], (unit(rng) - 0.5) * shape.extents[1],
                         (unit(rng) - 0.5) * shape.extents[2]);
        break;
      case ShapeKind::sphere: {
        Vector3d p;
        do {
          p = Vector3d(2.0 * unit(rng) - 1.0, 2.0 * unit(rng) - 1.0, 2.0 * unit(rng) - 1.0);
        } while (p.squaredNorm() > 1.0);
        pts.push_back(shape.radius * p);
        break;
      }
      case ShapeKind::none:
        throw std::invalid_argument("sample_shape: unsupported shape");
    }
  }
  return pts;
}

double sampled_energy_oracle(const RigidBodySpec& body, const FramePose& pose, const Vector3d& v,
                             const Vector3d& omega, int n_samples, std::uint64_t seed) {
  if (n_samples < 1000) throw std::invalid_argument("sampled_energy_oracle: need at least 1000 samples");
  const auto pts = sample_shape(body.shape, n_samples, seed);
  double acc = 0.0;
  for (const auto& u : pts) acc += (v + omega.cross(pose.axes * u)).squaredNorm();
  return 0.5 * body.mass * acc / static_cast<double>(n_samples);
}

}  // namespace gnh
