#include "gnh/gnh.h"

#include "gnh/chain_io.hpp"
#include "gnh/errors.hpp"
#include "gnh/experiments.hpp"

#include <cstring>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <variant>

struct gnh_chain {
  gnh::KinematicChain chain;
};

struct gnh_report {
  std::variant<gnh::ConvergenceReport, gnh::SweepReport, gnh::OptimizeReport, gnh::CheckReport> value;
};

namespace {

thread_local std::string last_error;

gnh_status fail(gnh_status status, const std::string& message) {
  last_error = message;
  return status;
}

// Maps the library's exception types onto status codes.
template <typename Fn>
gnh_status guarded(Fn&& fn) {
  last_error.clear();
  try {
    fn();
    return GNH_OK;
  } catch (const gnh::ConfigError& e) {
    return fail(GNH_ERR_CONFIG, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(GNH_ERR_CONFIG, std::string("invalid JSON: ") + e.what());
  } catch (const gnh::IoError& e) {
    return fail(GNH_ERR_IO, e.what());
  } catch (const gnh::NumericalError& e) {
    return fail(GNH_ERR_NUMERICAL, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(GNH_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::out_of_range& e) {
    return fail(GNH_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(GNH_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(GNH_ERR_INTERNAL, "unknown error");
  }
}

nlohmann::json parse_config(const char* text) {
  if (text == nullptr || std::string_view(text).find_first_not_of(" \t\r\n") == std::string_view::npos)
    return nlohmann::json::object();
  return nlohmann::json::parse(text);
}

// Relative paths in configs are taken relative to `base_dir`.
void resolve_path(nlohmann::json& doc, const char* key, const char* base_dir) {
  if (base_dir == nullptr || !doc.is_object() || !doc.contains(key) || !doc[key].is_string()) return;
  const std::string value = doc[key].get<std::string>();
  if (value.empty() || value.rfind("builtin:", 0) == 0) return;
  const std::filesystem::path p(value);
  if (p.is_absolute()) return;
  doc[key] = (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::string summary(const gnh::ConvergenceReport& r) {
  std::ostringstream os;
  for (const auto& s : r.slopes)
    os << "k=" << s.k << " slope " << s.slope << " r2 " << s.r2 << " (" << s.n_points << " points)\n";
  return os.str();
}

std::string summary(const gnh::SweepReport& r) {
  std::ostringstream os;
  std::map<std::string, std::pair<int, int>> counts;
  for (const auto& t : r.trials) {
    auto& c = counts[t.formulation];
    c.first += t.success ? 1 : 0;
    c.second += 1;
  }
  for (const auto& [form, c] : counts) os << form << ": " << c.first << "/" << c.second << " runs succeeded\n";
  return os.str();
}

std::string summary(const gnh::OptimizeReport& r) {
  std::ostringstream os;
  os << "termination " << r.solve.at("termination").get<std::string>() << ", "
     << r.solve.at("inner_iterations").get<int>() << " inner / " << r.solve.at("outer_iterations").get<int>()
     << " outer iterations, final violation " << r.solve.at("violation_history").back().get<double>() << "\n";
  const auto msg = r.solve.at("message").get<std::string>();
  if (!msg.empty()) os << msg << "\n";
  return os.str();
}

std::string summary(const gnh::CheckReport& r) {
  std::ostringstream os;
  int failed = 0;
  for (const auto& row : r.rows)
    if (!row.passed) {
      ++failed;
      os << "FAIL " << row.name << ": " << row.max_error << " > " << row.tolerance << "\n";
    }
  os << r.rows.size() - static_cast<std::size_t>(failed) << "/" << r.rows.size() << " checks passed\n";
  return os.str();
}

}  // namespace

extern "C" {

const char* gnh_version(void) { return gnh::kVersion; }

const char* gnh_last_error(void) { return last_error.c_str(); }

const char* gnh_status_name(gnh_status status) {
  switch (status) {
    case GNH_OK: return "ok";
    case GNH_ERR_INVALID_ARGUMENT: return "invalid argument";
    case GNH_ERR_IO: return "i/o error";
    case GNH_ERR_CONFIG: return "config error";
    case GNH_ERR_NUMERICAL: return "numerical failure";
    case GNH_ERR_INTERNAL: return "internal error";
  }
  return "unknown";
}

gnh_status gnh_chain_load(const char* path, gnh_chain** out) {
  if (path == nullptr || out == nullptr) return fail(GNH_ERR_INVALID_ARGUMENT, "gnh_chain_load: null argument");
  *out = nullptr;
  return guarded([&] { *out = new gnh_chain{gnh::load_chain(path)}; });
}

void gnh_chain_free(gnh_chain* chain) { delete chain; }

int gnh_chain_dof(const gnh_chain* chain) { return chain ? chain->chain.dof() : -1; }

gnh_status gnh_chain_frame_position(const gnh_chain* chain, const char* frame, const double* q, size_t n,
                                    double out[3]) {
  if (!chain || !frame || !q || !out) return fail(GNH_ERR_INVALID_ARGUMENT, "gnh_chain_frame_position: null argument");
  if (n != static_cast<size_t>(chain->chain.dof()))
    return fail(GNH_ERR_INVALID_ARGUMENT, "gnh_chain_frame_position: q has the wrong length");
  return guarded([&] {
    if (!chain->chain.has_frame(frame)) throw std::invalid_argument(std::string("unknown frame '") + frame + "'");
    const auto& f = chain->chain.frame(frame);
    const Eigen::VectorXd qv = Eigen::Map<const Eigen::VectorXd>(q, static_cast<Eigen::Index>(n));
    const Eigen::Vector3d p = gnh::point_position(gnh::forward_kinematics(chain->chain, qv), f.link, f.point);
    for (int i = 0; i < 3; ++i) out[i] = p[i];
  });
}

gnh_status gnh_chain_inertia_matrix(const gnh_chain* chain, const double* q, size_t n, double* out) {
  if (!chain || !q || !out) return fail(GNH_ERR_INVALID_ARGUMENT, "gnh_chain_inertia_matrix: null argument");
  if (n != static_cast<size_t>(chain->chain.dof()))
    return fail(GNH_ERR_INVALID_ARGUMENT, "gnh_chain_inertia_matrix: q has the wrong length");
  return guarded([&] {
    const Eigen::VectorXd qv = Eigen::Map<const Eigen::VectorXd>(q, static_cast<Eigen::Index>(n));
    const Eigen::MatrixXd m = gnh::inertia_matrix(chain->chain, qv);
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        out, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) = m;
  });
}

gnh_status gnh_run_convergence(const char* config_json, const char* base_dir, gnh_report** out) {
  if (!out) return fail(GNH_ERR_INVALID_ARGUMENT, "gnh_run_convergence: null output");
  *out = nullptr;
  return guarded([&] {
    auto doc = parse_config(config_json);
    resolve_path(doc, "chain", base_dir);
    *out = new gnh_report{gnh::run_convergence(gnh::convergence_config_from_json(doc))};
  });
}

gnh_status gnh_run_energy_sweep(const char* config_json, const char* base_dir, gnh_report** out) {
  if (!out) return fail(GNH_ERR_INVALID_ARGUMENT, "gnh_run_energy_sweep: null output");
  *out = nullptr;
  return guarded([&] {
    auto doc = parse_config(config_json);
    resolve_path(doc, "chain", base_dir);
    resolve_path(doc, "trials_file", base_dir);
    *out = new gnh_report{gnh::run_energy_sweep(gnh::energy_sweep_config_from_json(doc))};
  });
}

gnh_status gnh_run_optimize(const char* problem_json, const char* base_dir, gnh_report** out) {
  if (!out) return fail(GNH_ERR_INVALID_ARGUMENT, "gnh_run_optimize: null output");
  *out = nullptr;
  return guarded([&] {
    auto doc = parse_config(problem_json);
    resolve_path(doc, "chain", base_dir);
    *out = new gnh_report{gnh::run_optimize(gnh::problem_from_json(doc))};
  });
}

gnh_status gnh_run_check(const char* config_json, const char* base_dir, gnh_report** out) {
  if (!out) return fail(GNH_ERR_INVALID_ARGUMENT, "gnh_run_check: null output");
  *out = nullptr;
  return guarded([&] {
    auto doc = parse_config(config_json);
    resolve_path(doc, "chain", base_dir);
    *out = new gnh_report{gnh::run_checks(gnh::check_config_from_json(doc))};
  });
}

gnh_status gnh_report_write(const gnh_report* report, const char* path, const char* format) {
  if (!report || !path || !format) return fail(GNH_ERR_INVALID_ARGUMENT, "gnh_report_write: null argument");
  return guarded([&] {
    const auto f = gnh::parse_format(format);
    std::visit([&](const auto& r) { gnh::emit_report(r, f, path); }, report->value);
  });
}

gnh_status gnh_report_to_json(const gnh_report* report, char** out) {
  if (!report || !out) return fail(GNH_ERR_INVALID_ARGUMENT, "gnh_report_to_json: null argument");
  *out = nullptr;
  return guarded([&] {
    *out = copy_string(std::visit([](const auto& r) { return gnh::to_json(r).dump(2); }, report->value));
  });
}

gnh_status gnh_report_summary(const gnh_report* report, char** out) {
  if (!report || !out) return fail(GNH_ERR_INVALID_ARGUMENT, "gnh_report_summary: null argument");
  *out = nullptr;
  return guarded([&] { *out = copy_string(std::visit([](const auto& r) { return summary(r); }, report->value)); });
}

int gnh_report_ok(const gnh_report* report) {
  if (!report) return 0;
  if (const auto* o = std::get_if<gnh::OptimizeReport>(&report->value)) return o->converged ? 1 : 0;
  if (const auto* c = std::get_if<gnh::CheckReport>(&report->value)) return c->all_passed() ? 1 : 0;
  return 1;
}

void gnh_report_free(gnh_report* report) { delete report; }

void gnh_string_free(char* s) { delete[] s; }

}  // extern "C"
