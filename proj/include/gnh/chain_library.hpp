#pragma once

#include "gnh/kinematics.hpp"

namespace gnh::chains {

/// Planar arm with two unit links rotating about z; frame "ee" at the tip.
KinematicChain planar_two_link(double link_length = 1.0);

/// Point-like pendulum: one z-joint, a tiny sphere of mass `mass` at distance `length` along x.
KinematicChain pendulum(double mass, double length);

/// Generic 8-DOF serial arm with alternating z/y axes (about 1.5 m tall). Upper arm and
/// forearm are 9 kg cylinders (L = 0.5 m, r = 0.12 m), the hand the same cylinder at 0.9 kg.
/// Frame "ee" sits 0.15 m past the last joint.
KinematicChain generic_arm8();

/// Three-joint chain carrying the two 9 kg cylinders and the 0.9 kg hand cylinder.
KinematicChain cylinder_arm3();

/// Cylinder used throughout: M = 9 kg, L = 0.5 m, r = 0.12 m.
Shape arm_cylinder();

/// Posture used as the null-space default for the 8-DOF arm.
VectorXd generic_arm8_default_posture();

}  // namespace gnh::chains
