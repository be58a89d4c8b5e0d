// Command-line front end. Talks to the library only through the C API.

#include "gnh/gnh.h"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

enum Exit { kOk = 0, kConfigError = 1, kNumericalFailure = 2 };

struct Options {
  std::string config;
  std::string out;
  std::string format = "csv";
  std::optional<std::uint64_t> seed;
  int jobs = 1;
};

int exit_code(gnh_status s) {
  switch (s) {
    case GNH_OK: return kOk;
    case GNH_ERR_NUMERICAL:
    case GNH_ERR_INTERNAL: return kNumericalFailure;
    default: return kConfigError;
  }
}

int report_error(gnh_status s) {
  std::cerr << "gnh: " << gnh_status_name(s) << ": " << gnh_last_error() << "\n";
  return exit_code(s);
}

bool read_file(const std::string& path, std::string& text) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream os;
  os << in.rdbuf();
  text = os.str();
  return true;
}

using Runner = gnh_status (*)(const char*, const char*, gnh_report**);

// Loads the config, folds command-line overrides into it, runs, and writes the report.
int run(const Options& opt, Runner runner, bool takes_seed, bool takes_jobs, bool config_required) {
  nlohmann::json doc = nlohmann::json::object();
  std::string base_dir;
  if (!opt.config.empty()) {
    std::string text;
    if (!read_file(opt.config, text)) {
      std::cerr << "gnh: cannot read config '" << opt.config << "'\n";
      return kConfigError;
    }
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      std::cerr << "gnh: " << opt.config << ": " << e.what() << "\n";
      return kConfigError;
    }
    base_dir = std::filesystem::absolute(opt.config).parent_path().string();
  } else if (config_required) {
    std::cerr << "gnh: --config is required\n";
    return kConfigError;
  }
  if (!doc.is_object()) {
    std::cerr << "gnh: config must be a JSON object\n";
    return kConfigError;
  }
  if (takes_seed && opt.seed) doc["seed"] = *opt.seed;
  if (takes_jobs && opt.jobs != 1) doc["jobs"] = opt.jobs;

  gnh_report* report = nullptr;
  const std::string text = doc.dump();
  const gnh_status s = runner(text.c_str(), base_dir.empty() ? nullptr : base_dir.c_str(), &report);
  if (s != GNH_OK) return report_error(s);

  int code = kOk;
  if (opt.out.empty()) {
    char* json = nullptr;
    if (gnh_report_to_json(report, &json) == GNH_OK) {
      std::cout << json << "\n";
      gnh_string_free(json);
    }
  } else {
    const gnh_status w = gnh_report_write(report, opt.out.c_str(), opt.format.c_str());
    if (w != GNH_OK) code = report_error(w);
  }
  char* summary = nullptr;
  if (gnh_report_summary(report, &summary) == GNH_OK) {
    std::cerr << summary;
    gnh_string_free(summary);
  }
  if (code == kOk && !gnh_report_ok(report)) code = kNumericalFailure;
  gnh_report_free(report);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gauss-Newton Hessian trajectory optimization experiments"};
  app.set_version_flag("--version", gnh_version());
  app.require_subcommand(1);

  Options opt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "JSON config or problem file")->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output path (JSON to stdout when omitted)");
    sub->add_option("--format", opt.format, "output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--seed", opt.seed, "RNG seed override (energy-sweep, check)");
  };

  auto* convergence = app.add_subcommand("convergence", "true vs Gauss-Newton Hessian error over a dt sweep");
  add_common(convergence);
  convergence->add_option("--jobs", opt.jobs, "worker threads (results are identical for any value)")
      ->check(CLI::PositiveNumber);
  auto* sweep = app.add_subcommand("energy-sweep", "kinetic energy weight sweep on seeded reach trials");
  add_common(sweep);
  sweep->add_option("--jobs", opt.jobs, "worker threads (results are identical for any value)")
      ->check(CLI::PositiveNumber);
  auto* optimize = app.add_subcommand("optimize", "solve a problem file");
  add_common(optimize);
  auto* check = app.add_subcommand("check", "finite-difference self-checks");
  add_common(check);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  if (*convergence) return run(opt, gnh_run_convergence, false, true, false);
  if (*sweep) return run(opt, gnh_run_energy_sweep, true, true, false);
  if (*optimize) return run(opt, gnh_run_optimize, false, false, true);
  if (*check) return run(opt, gnh_run_check, true, false, false);
  return kConfigError;
}
