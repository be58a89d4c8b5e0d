#include "gnh/chain_io.hpp"

#include "gnh/chain_library.hpp"
#include "gnh/errors.hpp"

#include <Eigen/Geometry>

#include <fstream>

namespace gnh {

using nlohmann::json;

namespace {

Vector3d vec3(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(std::string(what) + ": expected an array of 3 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json to_json(const Vector3d& v) { return json::array({v[0], v[1], v[2]}); }

// rotation given either as a 3x3 row-major matrix or as roll-pitch-yaw (xyz fixed axes)
Matrix3d rotation(const json& j) {
  if (j.contains("rpy")) {
    const Vector3d rpy = vec3(j.at("rpy"), "rpy");
    return (Eigen::AngleAxisd(rpy[2], Vector3d::UnitZ()) * Eigen::AngleAxisd(rpy[1], Vector3d::UnitY()) *
            Eigen::AngleAxisd(rpy[0], Vector3d::UnitX()))
        .toRotationMatrix();
  }
  if (j.contains("rotation")) {
    const json& r = j.at("rotation");
    if (!r.is_array() || r.size() != 3) throw ConfigError("rotation: expected 3 rows");
    Matrix3d m;
    for (int i = 0; i < 3; ++i) m.row(i) = vec3(r[static_cast<std::size_t>(i)], "rotation row").transpose();
    return m;
  }
  return Matrix3d::Identity();
}

json rotation_json(const Matrix3d& m) {
  json rows = json::array();
  for (int i = 0; i < 3; ++i) rows.push_back(to_json(m.row(i).transpose()));
  return rows;
}

Shape shape_from_json(const json& j) {
  Shape s;
  const auto type = j.at("type").get<std::string>();
  if (type == "cylinder") {
    s.kind = ShapeKind::cylinder;
    s.length = j.at("length").get<double>();
    s.radius = j.at("radius").get<double>();
  } else if (type == "box") {
    s.kind = ShapeKind::box;
    s.extents = vec3(j.at("extents"), "box extents");
  } else if (type == "sphere") {
    s.kind = ShapeKind::sphere;
    s.radius = j.at("radius").get<double>();
  } else {
    throw ConfigError("unknown shape type '" + type + "'");
  }
  return s;
}

json shape_to_json(const Shape& s) {
  switch (s.kind) {
    case ShapeKind::cylinder: return {{"type", "cylinder"}, {"length", s.length}, {"radius", s.radius}};
    case ShapeKind::box: return {{"type", "box"}, {"extents", to_json(s.extents)}};
    case ShapeKind::sphere: return {{"type", "sphere"}, {"radius", s.radius}};
    case ShapeKind::none: break;
  }
  return nullptr;
}

}  // namespace

KinematicChain chain_from_json(const json& doc) {
  try {
    const int version = doc.at("version").get<int>();
    if (version != kChainFormatVersion)
      throw ConfigError("chain file version " + std::to_string(version) + " is not supported");
    KinematicChain chain;
    for (const auto& jj : doc.at("joints")) {
      Joint joint;
      joint.name = jj.value("name", "joint" + std::to_string(chain.dof()));
      joint.axis = vec3(jj.at("axis"), "joint axis");
      if (jj.contains("origin")) {
        joint.origin.translation = vec3(jj.at("origin").value("translation", json::array({0.0, 0.0, 0.0})), "translation");
        joint.origin.rotation = rotation(jj.at("origin"));
      }
      joint.lower = jj.value("lower", joint.lower);
      joint.upper = jj.value("upper", joint.upper);
      chain.add_joint(std::move(joint));
    }
    for (const auto& jb : doc.value("bodies", json::array())) {
      RigidBodySpec body;
      body.name = jb.value("name", "body");
      body.mass = jb.at("mass").get<double>();
      body.link = jb.at("link").get<int>();
      body.com = vec3(jb.value("com", json::array({0.0, 0.0, 0.0})), "com");
      if (jb.contains("axes")) {
        const json& ax = jb.at("axes");
        for (int i = 0; i < 3; ++i) body.axes.col(i) = vec3(ax.at(static_cast<std::size_t>(i)), "axis");
      }
      if (jb.contains("shape")) body.shape = shape_from_json(jb.at("shape"));
      if (jb.contains("b"))
        body.b = vec3(jb.at("b"), "b");
      else
        body.b = distributional_diagonal(body.shape, body.mass);
      chain.add_body(std::move(body));
    }
    for (const auto& jf : doc.value("frames", json::array()))
      chain.add_frame({jf.at("name").get<std::string>(), jf.at("link").get<int>(),
                       vec3(jf.value("point", json::array({0.0, 0.0, 0.0})), "frame point")});
    return chain;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("chain description: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("chain description: ") + e.what());
  }
}

json chain_to_json(const KinematicChain& chain) {
  json doc;
  doc["version"] = kChainFormatVersion;
  doc["joints"] = json::array();
  for (const auto& j : chain.joints())
    doc["joints"].push_back({{"name", j.name},
                             {"axis", to_json(j.axis)},
                             {"origin", {{"translation", to_json(j.origin.translation)}, {"rotation", rotation_json(j.origin.rotation)}}},
                             {"lower", j.lower},
                             {"upper", j.upper}});
  doc["bodies"] = json::array();
  for (const auto& b : chain.bodies()) {
    json jb = {{"name", b.name}, {"mass", b.mass}, {"link", b.link}, {"com", to_json(b.com)}, {"b", to_json(b.b)},
               {"axes", json::array({to_json(b.axes.col(0)), to_json(b.axes.col(1)), to_json(b.axes.col(2))})}};
    if (b.shape.kind != ShapeKind::none) jb["shape"] = shape_to_json(b.shape);
    doc["bodies"].push_back(jb);
  }
  doc["frames"] = json::array();
  for (const auto& f : chain.frames())
    doc["frames"].push_back({{"name", f.name}, {"link", f.link}, {"point", to_json(f.point)}});
  return doc;
}

KinematicChain load_chain(const std::string& path) {
  const std::string prefix = "builtin:";
  if (path.rfind(prefix, 0) == 0) {
    const std::string name = path.substr(prefix.size());
    if (name == "generic_arm8") return chains::generic_arm8();
    if (name == "planar_two_link") return chains::planar_two_link();
    if (name == "cylinder_arm3") return chains::cylinder_arm3();
    throw ConfigError("unknown built-in chain '" + name + "'");
  }
  std::ifstream in(path);
  if (!in) throw IoError("cannot open chain file '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("chain file '" + path + "': " + e.what());
  }
  return chain_from_json(doc);
}

}  // namespace gnh
