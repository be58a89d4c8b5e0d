#pragma once

#include "gnh/kinematics.hpp"

#include "json.hpp"

#include <string>

namespace gnh {

/// Current chain file schema version. See docs/chain_format.md.
inline constexpr int kChainFormatVersion = 1;

KinematicChain chain_from_json(const nlohmann::json& doc);
nlohmann::json chain_to_json(const KinematicChain& chain);

/// Loads a chain file, or one of the built-in chains when `path` is "builtin:<name>"
/// (generic_arm8, planar_two_link, cylinder_arm3).
KinematicChain load_chain(const std::string& path);

}  // namespace gnh
