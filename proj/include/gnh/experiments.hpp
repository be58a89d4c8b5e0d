#pragma once

#include "gnh/objective.hpp"
#include "gnh/optimizer.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gnh {

inline constexpr const char* kVersion = "0.1.0";

enum class ReportFormat { csv, json };
ReportFormat parse_format(const std::string& s);

struct ReportMetadata {
  std::string kind;
  std::string config_hash;  ///< FNV-1a of the effective config, hex
  std::string version = kVersion;
  std::uint64_t seed = 0;
  bool operator==(const ReportMetadata&) const = default;
};

/// 64-bit FNV-1a over the compact dump of `doc`, as 16 hex digits.
std::string config_hash(const nlohmann::json& doc);

// ---------------------------------------------------------------------------
// Convergence of true to Gauss-Newton Hessians

struct ConvergenceConfig {
  std::string chain = "builtin:generic_arm8";
  std::string frame = "ee";
  /// "point" for the frame position, "affine" for a fixed random linear map (sanity run).
  std::string task = "point";
  std::vector<int> orders{1, 2};
  double dt_max = 0.15;
  double dt_min = 0.001;
  int n_dt = 20;
  double t_min = 0.0;
  double t_max = 1.0;
  int n_times = 20;
  double amplitude = 1.5707963267948966;
  double sigma_min = 0.5;
  double sigma_max = 2.0;
  double eta_min = 0.0;
  double eta_max = 3.141592653589793;
  FdHessianOptions fd;
  /// Points with mean error at or below this are excluded from the slope fit.
  double fit_floor = 1e-10;
  int jobs = 1;
};

ConvergenceConfig convergence_config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ConvergenceConfig& c);

/// Strictly decreasing log-spaced grid from dt_max to dt_min.
std::vector<double> dt_grid(const ConvergenceConfig& c);

/// q_i(t) = A sin(2 pi sigma_i (t - 1/2) + eta_i) with sigma, eta linearly spaced over the joints.
VectorXd test_trajectory(const ConvergenceConfig& c, int dof, double t);

struct ConvergenceRow {
  int k = 0;
  double dt = 0.0;
  double mean_err = 0.0;
  double std_err = 0.0;
  double mean_distance = 0.0;   ///< Frobenius distance of the scaled blocks
  double max_offdiag_err = 0.0; ///< worst relative mismatch of an off-diagonal block
  bool operator==(const ConvergenceRow&) const = default;
};

struct SlopeFit {
  int k = 0;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int n_points = 0;
  bool operator==(const SlopeFit&) const = default;
};

/// OLS fit of log(y) on log(x) over points with y > floor. n_points < 2 leaves the fit empty.
SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y, double floor);

struct ConvergenceReport {
  ReportMetadata meta;
  std::vector<ConvergenceRow> rows;
  std::vector<SlopeFit> slopes;
  bool operator==(const ConvergenceReport&) const = default;
};

/// Comparison for one (k, dt, t) cell: a local trajectory of 2k+3 samples of the test
/// trajectory centered on time t, the squared k-th derivative of the task map on it, and
/// the FD Hessian block of the center configuration against the Gauss-Newton block.
/// Both blocks are scaled by dt^{2k} / (S_k dt), which keeps their limit finite and nonzero.
struct CellResult {
  HessianComparison diagonal;
  double offdiag_err = 0.0;
};
CellResult convergence_cell(const ConvergenceConfig& c, std::shared_ptr<const TaskMap> phi, int k, double dt,
                            double t);

ConvergenceReport run_convergence(const ConvergenceConfig& c);

// ---------------------------------------------------------------------------
// Energy-weight sweep

struct ReachTrial {
  VectorXd start;
  Vector3d goal;
};

/// Reachable start/goal pairs: starts are perturbations of the default posture, goals the
/// frame position of another perturbed posture.
std::vector<ReachTrial> generate_trials(const KinematicChain& chain, const VectorXd& posture, const std::string& frame,
                                        int n, std::uint64_t seed);
std::vector<ReachTrial> trials_from_json(const nlohmann::json& doc);
nlohmann::json trials_to_json(const std::vector<ReachTrial>& trials);

struct EnergySweepConfig {
  std::string chain = "builtin:generic_arm8";
  std::string frame = "ee";
  std::vector<std::string> formulations{"exact", "cholesky"};
  int n_weights = 6;
  double weight_min = 1.0;
  double weight_max = 500.0;
  int steps = 20;      ///< T
  double dt = 0.05;
  double alpha1 = 0.0;  ///< configuration velocity penalty
  double alpha2 = 1e-3; ///< configuration acceleration penalty
  double boundary_velocity_weight = 0.1;
  double posture_weight = 1e-2;
  std::optional<VectorXd> posture;  ///< chain default when unset
  std::string trials_file;          ///< generated from `seed` when empty
  int n_trials = 12;
  std::uint64_t seed = 7;
  double success_violation = 1e-4;
  double metric_jitter = 1e-8;
  OptimizerConfig optimizer;
  int jobs = 1;
};

EnergySweepConfig energy_sweep_config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const EnergySweepConfig& c);

/// {0} followed by n log-spaced weights in [min, max].
std::vector<double> weight_grid(const EnergySweepConfig& c);

struct TrialRecord {
  std::string formulation;
  int trial = 0;
  double weight = 0.0;
  double energy = 0.0;
  double normalized = 0.0;
  bool success = false;
  std::string termination;
  double violation = 0.0;
  int iterations = 0;
  bool operator==(const TrialRecord&) const = default;
};

struct SweepRow {
  std::string formulation;
  double weight = 0.0;
  double weight_normalized = 0.0;  ///< weight / max weight
  double mean_energy = 0.0;        ///< of the per-trial normalized energies
  double std_energy = 0.0;
  int n_trials = 0;
  bool trimmed = false;            ///< failed trials excluded
  bool operator==(const SweepRow&) const = default;
};

struct SweepReport {
  ReportMetadata meta;
  std::vector<SweepRow> rows;
  std::vector<TrialRecord> trials;
  bool operator==(const SweepReport&) const = default;
};

/// Kinetic energy of a trajectory through the rigid body inertial map, summed over all
/// velocity cliques with the dt factor.
double trajectory_energy(std::shared_ptr<const KinematicChain> chain, const Trajectory& traj);

/// The reach problem of one sweep cell. `formulation` is "exact" or "cholesky".
Problem reach_problem(const EnergySweepConfig& c, std::shared_ptr<const KinematicChain> chain, const ReachTrial& trial,
                      const std::string& formulation, double weight);

SweepReport run_energy_sweep(const EnergySweepConfig& c);

// ---------------------------------------------------------------------------
// General problems and self-checks

struct ProblemSpec {
  std::shared_ptr<const KinematicChain> chain;
  Problem problem;
  OptimizerConfig optimizer;
  nlohmann::json source;
};

/// Parses a problem description. See docs/config.md for the schema.
ProblemSpec problem_from_json(const nlohmann::json& doc);

struct OptimizeReport {
  ReportMetadata meta;
  nlohmann::json solve;  ///< serialized SolveReport
  bool converged = false;
  bool operator==(const OptimizeReport&) const = default;
};

nlohmann::json solve_report_to_json(const SolveReport& r);
OptimizeReport run_optimize(const ProblemSpec& spec);

struct CheckConfig {
  std::string chain = "builtin:generic_arm8";
  int samples = 20;
  double tolerance = 1e-5;
  std::uint64_t seed = 1;
};
CheckConfig check_config_from_json(const nlohmann::json& doc);

struct CheckRow {
  std::string name;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  bool operator==(const CheckRow&) const = default;
};

struct CheckReport {
  ReportMetadata meta;
  std::vector<CheckRow> rows;
  bool all_passed() const;
  bool operator==(const CheckReport&) const = default;
};

/// FD self-checks of every Jacobian, term gradient and constraint Jacobian on random
/// cliques, plus banded-vs-dense assembly and solve.
CheckReport run_checks(const CheckConfig& c);

// ---------------------------------------------------------------------------
// Serialization

nlohmann::json to_json(const ConvergenceReport& r);
nlohmann::json to_json(const SweepReport& r);
nlohmann::json to_json(const OptimizeReport& r);
nlohmann::json to_json(const CheckReport& r);
ConvergenceReport convergence_report_from_json(const nlohmann::json& doc);
SweepReport sweep_report_from_json(const nlohmann::json& doc);

/// CSV text. The convergence report's slopes go to a separate table, see slopes_csv.
std::string to_csv(const ConvergenceReport& r);
std::string slopes_csv(const ConvergenceReport& r);
std::string to_csv(const SweepReport& r);
std::string to_csv(const OptimizeReport& r);
std::string to_csv(const CheckReport& r);

/// Writes `text` to `path`, throwing IoError with the path on failure.
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

/// "<dir>/<stem>_slopes.csv" next to `path`.
std::string slopes_path(const std::string& path);

template <typename Report>
void emit_report(const Report& r, ReportFormat format, const std::string& path) {
  if (format == ReportFormat::json) {
    write_text(path, to_json(r).dump(2) + "\n");
    return;
  }
  write_text(path, to_csv(r));
  if constexpr (std::is_same_v<Report, ConvergenceReport>) write_text(slopes_path(path), slopes_csv(r));
}

}  // namespace gnh
