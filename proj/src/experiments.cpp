#include "gnh/experiments.hpp"

#include "gnh/chain_io.hpp"
#include "gnh/chain_library.hpp"
#include "gnh/cholesky_metric.hpp"
#include "gnh/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace gnh {

using nlohmann::json;

namespace {

// Strict reader over a JSON object: typed lookups with defaults, unknown keys rejected.
class Reader {
 public:
  Reader(const json& doc, std::string where) : doc_(doc), where_(std::move(where)) {
    if (!doc_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return doc_.contains(key) && !doc_.at(key).is_null();
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    return convert<T>(doc_.at(key), key);
  }

  template <typename T>
  T require(const std::string& key) {
    if (!has(key)) throw ConfigError(where_ + ": missing '" + key + "'");
    return convert<T>(doc_.at(key), key);
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return doc_.at(key);
  }

  void finish() const {
    for (const auto& [key, value] : doc_.items())
      if (!seen_.count(key)) throw ConfigError(where_ + ": unknown key '" + key + "'");
  }

  const std::string& where() const { return where_; }

 private:
  template <typename T>
  T convert(const json& v, const std::string& key) const {
    try {
      if constexpr (std::is_same_v<T, VectorXd>) {
        const auto xs = v.get<std::vector<double>>();
        return Eigen::Map<const VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
      } else if constexpr (std::is_same_v<T, Vector3d>) {
        const auto xs = v.get<std::vector<double>>();
        if (xs.size() != 3) throw ConfigError(where_ + ": '" + key + "' must have 3 entries");
        return Vector3d(xs[0], xs[1], xs[2]);
      } else {
        return v.get<T>();
      }
    } catch (const json::exception& e) {
      throw ConfigError(where_ + ": bad value for '" + key + "': " + e.what());
    }
  }

  const json& doc_;
  std::string where_;
  std::set<std::string> seen_;
};

json vec_json(const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

void check_positive(double v, const std::string& what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(what + " must be positive");
}

// Runs fn(i) for i in [0, n), on `jobs` threads. Exceptions are rethrown in index order.
template <typename Fn>
void parallel_for(int n, int jobs, Fn&& fn) {
  if (jobs <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int j = 0; j < std::min(jobs, n); ++j)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::pair<double, double> mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return out;
}

std::vector<double> logspace(double a, double b, int n) {
  auto out = linspace(std::log(a), std::log(b), n);
  for (double& x : out) x = std::exp(x);
  out.front() = a;
  out.back() = b;
  return out;
}

VectorXd default_posture(const std::string& chain_path, int dof) {
  if (chain_path == "builtin:generic_arm8") return chains::generic_arm8_default_posture();
  return VectorXd::Zero(dof);
}

FdHessianOptions fd_options_from_json(const json& doc) {
  Reader r(doc, "fd");
  FdHessianOptions o;
  const auto scheme = r.get<std::string>("scheme", "gradient");
  if (scheme == "gradient") o.scheme = FdHessianOptions::Scheme::gradient;
  else if (scheme == "value") o.scheme = FdHessianOptions::Scheme::value;
  else throw ConfigError("fd: scheme must be 'gradient' or 'value'");
  if (r.has("step")) {
    o.step = r.require<double>("step");
    check_positive(*o.step, "fd.step");
  }
  o.richardson = r.get<bool>("richardson", o.richardson);
  o.asymmetry_tolerance = r.get<double>("asymmetry_tolerance", o.asymmetry_tolerance);
  r.finish();
  return o;
}

json to_json(const FdHessianOptions& o) {
  json j{{"scheme", o.scheme == FdHessianOptions::Scheme::gradient ? "gradient" : "value"},
         {"richardson", o.richardson},
         {"asymmetry_tolerance", o.asymmetry_tolerance}};
  j["step"] = o.step ? json(*o.step) : json(nullptr);
  return j;
}

OptimizerConfig optimizer_config_from_json(const json& doc) {
  Reader r(doc, "optimizer");
  OptimizerConfig c;
  c.tol_g = r.get("tol_g", c.tol_g);
  c.tol_c = r.get("tol_c", c.tol_c);
  c.max_inner = r.get("max_inner", c.max_inner);
  c.max_outer = r.get("max_outer", c.max_outer);
  c.rho_initial = r.get("rho_initial", c.rho_initial);
  c.rho_growth = r.get("rho_growth", c.rho_growth);
  c.rho_max = r.get("rho_max", c.rho_max);
  c.violation_shrink = r.get("violation_shrink", c.violation_shrink);
  c.armijo_c = r.get("armijo_c", c.armijo_c);
  c.backtrack = r.get("backtrack", c.backtrack);
  c.max_halvings = r.get("max_halvings", c.max_halvings);
  if (r.has("regularization")) {
    Reader g(r.raw("regularization"), "optimizer.regularization");
    c.regularization.initial = g.get("initial", c.regularization.initial);
    c.regularization.growth = g.get("growth", c.regularization.growth);
    c.regularization.cap = g.get("cap", c.regularization.cap);
    g.finish();
  }
  r.finish();
  check_positive(c.tol_g, "optimizer.tol_g");
  check_positive(c.tol_c, "optimizer.tol_c");
  check_positive(c.rho_initial, "optimizer.rho_initial");
  if (c.rho_growth < 1.0) throw ConfigError("optimizer.rho_growth must be >= 1");
  if (c.max_inner < 1 || c.max_outer < 1) throw ConfigError("optimizer iteration limits must be >= 1");
  if (!(c.backtrack > 0.0 && c.backtrack < 1.0)) throw ConfigError("optimizer.backtrack must lie in (0, 1)");
  if (!(c.armijo_c > 0.0 && c.armijo_c < 1.0)) throw ConfigError("optimizer.armijo_c must lie in (0, 1)");
  check_positive(c.regularization.initial, "optimizer.regularization.initial");
  if (c.regularization.growth <= 1.0) throw ConfigError("optimizer.regularization.growth must be > 1");
  return c;
}

json to_json(const OptimizerConfig& c) {
  return {{"tol_g", c.tol_g},
          {"tol_c", c.tol_c},
          {"max_inner", c.max_inner},
          {"max_outer", c.max_outer},
          {"rho_initial", c.rho_initial},
          {"rho_growth", c.rho_growth},
          {"rho_max", c.rho_max},
          {"violation_shrink", c.violation_shrink},
          {"armijo_c", c.armijo_c},
          {"backtrack", c.backtrack},
          {"max_halvings", c.max_halvings},
          {"regularization",
           {{"initial", c.regularization.initial}, {"growth", c.regularization.growth}, {"cap", c.regularization.cap}}}};
}

std::shared_ptr<const KinematicChain> chain_from_config(const json& v, const std::string& where) {
  if (v.is_string()) return std::make_shared<const KinematicChain>(load_chain(v.get<std::string>()));
  if (v.is_object()) return std::make_shared<const KinematicChain>(chain_from_json(v));
  throw ConfigError(where + ": 'chain' must be a path, builtin name or inline chain");
}

json metadata_json(const ReportMetadata& m) {
  return {{"kind", m.kind}, {"config_hash", m.config_hash}, {"version", m.version}, {"seed", m.seed}};
}

ReportMetadata metadata_from_json(const json& j) {
  ReportMetadata m;
  m.kind = j.at("kind").get<std::string>();
  m.config_hash = j.at("config_hash").get<std::string>();
  m.version = j.at("version").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  return m;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

ReportFormat parse_format(const std::string& s) {
  if (s == "csv") return ReportFormat::csv;
  if (s == "json") return ReportFormat::json;
  throw ConfigError("format must be 'csv' or 'json', got '" + s + "'");
}

std::string config_hash(const json& doc) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : doc.dump()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Convergence

ConvergenceConfig convergence_config_from_json(const json& doc) {
  Reader r(doc, "convergence config");
  ConvergenceConfig c;
  c.chain = r.get("chain", c.chain);
  c.frame = r.get("frame", c.frame);
  c.task = r.get("task", c.task);
  c.orders = r.get("orders", c.orders);
  c.dt_max = r.get("dt_max", c.dt_max);
  c.dt_min = r.get("dt_min", c.dt_min);
  c.n_dt = r.get("n_dt", c.n_dt);
  c.t_min = r.get("t_min", c.t_min);
  c.t_max = r.get("t_max", c.t_max);
  c.n_times = r.get("n_times", c.n_times);
  c.amplitude = r.get("amplitude", c.amplitude);
  c.sigma_min = r.get("sigma_min", c.sigma_min);
  c.sigma_max = r.get("sigma_max", c.sigma_max);
  c.eta_min = r.get("eta_min", c.eta_min);
  c.eta_max = r.get("eta_max", c.eta_max);
  if (r.has("fd")) c.fd = fd_options_from_json(r.raw("fd"));
  c.fit_floor = r.get("fit_floor", c.fit_floor);
  c.jobs = r.get("jobs", c.jobs);
  r.finish();

  if (c.task != "point" && c.task != "affine") throw ConfigError("convergence: task must be 'point' or 'affine'");
  if (c.orders.empty()) throw ConfigError("convergence: orders is empty");
  for (int k : c.orders)
    if (k != 1 && k != 2) throw ConfigError("convergence: orders must be 1 or 2");
  check_positive(c.dt_min, "convergence.dt_min");
  if (!(c.dt_max > c.dt_min)) throw ConfigError("convergence: dt_max must exceed dt_min");
  if (c.n_dt < 3) throw ConfigError("convergence: n_dt must be at least 3 for slope fitting");
  if (c.n_times < 1) throw ConfigError("convergence: n_times must be positive");
  if (c.t_max < c.t_min) throw ConfigError("convergence: t_max < t_min");
  if (c.jobs < 1) throw ConfigError("convergence: jobs must be positive");
  return c;
}

json to_json(const ConvergenceConfig& c) {
  return {{"chain", c.chain},       {"frame", c.frame},         {"task", c.task},
          {"orders", c.orders},     {"dt_max", c.dt_max},       {"dt_min", c.dt_min},
          {"n_dt", c.n_dt},         {"t_min", c.t_min},         {"t_max", c.t_max},
          {"n_times", c.n_times},   {"amplitude", c.amplitude}, {"sigma_min", c.sigma_min},
          {"sigma_max", c.sigma_max}, {"eta_min", c.eta_min},   {"eta_max", c.eta_max},
          {"fd", to_json(c.fd)},    {"fit_floor", c.fit_floor}};
}

std::vector<double> dt_grid(const ConvergenceConfig& c) { return logspace(c.dt_max, c.dt_min, c.n_dt); }

VectorXd test_trajectory(const ConvergenceConfig& c, int dof, double t) {
  const auto sigma = linspace(c.sigma_min, c.sigma_max, dof);
  const auto eta = linspace(c.eta_min, c.eta_max, dof);
  VectorXd q(dof);
  for (int i = 0; i < dof; ++i) {
    const auto s = static_cast<std::size_t>(i);
    q[i] = c.amplitude * std::sin(2.0 * M_PI * sigma[s] * (t - 0.5) + eta[s]);
  }
  return q;
}

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y, double floor) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i)
    if (y[i] > floor && x[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  SlopeFit f;
  f.n_points = static_cast<int>(lx.size());
  if (lx.size() < 2) return f;
  const double n = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

CellResult convergence_cell(const ConvergenceConfig& c, std::shared_ptr<const TaskMap> phi, int k, double dt,
                            double t) {
  const int d = phi->input_dim();
  const int steps = 2 * k + 1;
  const int center = k + 1;
  auto at = [&](int j) { return test_trajectory(c, d, t + (j - center) * dt); };
  std::vector<VectorXd> states;
  for (int j = 1; j <= steps; ++j) states.push_back(at(j));
  const Trajectory traj(steps, dt, at(0), std::move(states), at(steps + 1));

  const FiniteDiffOperator op = make_fd_operator(k, dt);
  const std::vector<TermPtr> terms{std::make_shared<SquaredDerivativeTerm>(phi, op, 1.0, true)};
  const double scale = std::pow(dt, 2 * k) / (op.sum_sq() * dt);

  CellResult out;
  out.diagonal = full_hessian_fd(terms, traj, center, scale, c.fd);

  // Off-diagonal blocks coupling the center to its clique neighbors.
  const CliqueIndexing indexing(k, steps);
  const AssembledObjective a = assemble(terms, traj, indexing, true);
  for (int j = center - k; j <= center + k; ++j) {
    if (j == center || j < 1 || j > steps + 1) continue;
    const MatrixXd fd = fd_hessian_block(terms, traj, indexing, center, j, c.fd);
    const MatrixXd gn = a.hessian.block(center - 1, j - 1);
    const double denom = gn.norm();
    out.offdiag_err = std::max(out.offdiag_err, denom > 0.0 ? (fd - gn).norm() / denom : (fd - gn).norm());
  }
  return out;
}

ConvergenceReport run_convergence(const ConvergenceConfig& c) {
  const auto chain = std::make_shared<const KinematicChain>(load_chain(c.chain));
  std::shared_ptr<const TaskMap> phi;
  if (c.task == "point") {
    if (!chain->has_frame(c.frame)) throw ConfigError("convergence: chain has no frame '" + c.frame + "'");
    phi = std::make_shared<PointMap>(chain, c.frame);
  } else {
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> normal;
    MatrixXd a(3, chain->dof());
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
    phi = std::make_shared<AffineMap>(a, Vector3d(0.1, -0.2, 0.3));
  }

  const auto dts = dt_grid(c);
  const auto times = linspace(c.t_min, c.t_max, c.n_times);
  const int nk = static_cast<int>(c.orders.size());
  const int nd = static_cast<int>(dts.size());
  const int nt = static_cast<int>(times.size());
  std::vector<CellResult> cells(static_cast<std::size_t>(nk * nd * nt));
  parallel_for(nk * nd * nt, c.jobs, [&](int idx) {
    const int ki = idx / (nd * nt);
    const int di = (idx / nt) % nd;
    const int ti = idx % nt;
    cells[static_cast<std::size_t>(idx)] =
        convergence_cell(c, phi, c.orders[static_cast<std::size_t>(ki)], dts[static_cast<std::size_t>(di)],
                         times[static_cast<std::size_t>(ti)]);
  });

  ConvergenceReport report;
  report.meta.kind = "convergence";
  report.meta.config_hash = config_hash(to_json(c));
  for (int ki = 0; ki < nk; ++ki) {
    std::vector<double> means;
    for (int di = 0; di < nd; ++di) {
      std::vector<double> errs, dists;
      double offdiag = 0.0;
      for (int ti = 0; ti < nt; ++ti) {
        const CellResult& cell = cells[static_cast<std::size_t>((ki * nd + di) * nt + ti)];
        errs.push_back(cell.diagonal.err);
        dists.push_back(cell.diagonal.distance);
        offdiag = std::max(offdiag, cell.offdiag_err);
      }
      ConvergenceRow row;
      row.k = c.orders[static_cast<std::size_t>(ki)];
      row.dt = dts[static_cast<std::size_t>(di)];
      std::tie(row.mean_err, row.std_err) = mean_std(errs);
      row.mean_distance = mean_std(dists).first;
      row.max_offdiag_err = offdiag;
      means.push_back(row.mean_err);
      report.rows.push_back(row);
    }
    SlopeFit fit = fit_loglog(dts, means, c.fit_floor);
    fit.k = c.orders[static_cast<std::size_t>(ki)];
    report.slopes.push_back(fit);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Energy sweep

std::vector<ReachTrial> generate_trials(const KinematicChain& chain, const VectorXd& posture, const std::string& frame,
                                        int n, std::uint64_t seed) {
  if (!chain.has_frame(frame)) throw ConfigError("trials: chain has no frame '" + frame + "'");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> start_noise(-0.4, 0.4);
  std::uniform_real_distribution<double> goal_noise(-0.8, 0.8);
  const PointMap point(std::make_shared<const KinematicChain>(chain), frame);
  const VectorXd lo = chain.lower_limits(), hi = chain.upper_limits();
  auto perturb = [&](auto& dist) {
    VectorXd q = posture;
    for (Eigen::Index i = 0; i < q.size(); ++i) q[i] = std::clamp(q[i] + dist(rng), 0.9 * lo[i], 0.9 * hi[i]);
    return q;
  };
  std::vector<ReachTrial> out;
  while (static_cast<int>(out.size()) < n) {
    ReachTrial trial;
    trial.start = perturb(start_noise);
    const VectorXd target = perturb(goal_noise);
    trial.goal = point.map(target);
    // Skip goals too close to the start to need a real motion.
    if ((point.map(trial.start) - trial.goal).norm() < 0.2) continue;
    out.push_back(trial);
  }
  return out;
}

std::vector<ReachTrial> trials_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("trials") || !doc.at("trials").is_array())
    throw ConfigError("trials file: expected an object with a 'trials' array");
  std::vector<ReachTrial> out;
  for (const auto& item : doc.at("trials")) {
    Reader r(item, "trials file entry");
    ReachTrial t;
    t.start = r.require<VectorXd>("start");
    t.goal = r.require<Vector3d>("goal");
    r.finish();
    out.push_back(t);
  }
  if (out.empty()) throw ConfigError("trials file: no trials");
  return out;
}

json trials_to_json(const std::vector<ReachTrial>& trials) {
  json arr = json::array();
  for (const auto& t : trials) arr.push_back({{"start", vec_json(t.start)}, {"goal", vec_json(t.goal)}});
  return {{"trials", arr}};
}

EnergySweepConfig energy_sweep_config_from_json(const json& doc) {
  Reader r(doc, "energy sweep config");
  EnergySweepConfig c;
  c.chain = r.get("chain", c.chain);
  c.frame = r.get("frame", c.frame);
  c.formulations = r.get("formulations", c.formulations);
  c.n_weights = r.get("n_weights", c.n_weights);
  c.weight_min = r.get("weight_min", c.weight_min);
  c.weight_max = r.get("weight_max", c.weight_max);
  c.steps = r.get("steps", c.steps);
  c.dt = r.get("dt", c.dt);
  c.alpha1 = r.get("alpha1", c.alpha1);
  c.alpha2 = r.get("alpha2", c.alpha2);
  c.boundary_velocity_weight = r.get("boundary_velocity_weight", c.boundary_velocity_weight);
  c.posture_weight = r.get("posture_weight", c.posture_weight);
  if (r.has("posture")) c.posture = r.require<VectorXd>("posture");
  c.trials_file = r.get("trials_file", c.trials_file);
  c.n_trials = r.get("n_trials", c.n_trials);
  c.seed = r.get("seed", c.seed);
  c.success_violation = r.get("success_violation", c.success_violation);
  c.metric_jitter = r.get("metric_jitter", c.metric_jitter);
  if (r.has("optimizer")) c.optimizer = optimizer_config_from_json(r.raw("optimizer"));
  c.jobs = r.get("jobs", c.jobs);
  r.finish();

  if (c.formulations.empty()) throw ConfigError("energy sweep: formulations is empty");
  bool has_exact = false;
  for (const auto& f : c.formulations) {
    if (f != "exact" && f != "cholesky") throw ConfigError("energy sweep: unknown formulation '" + f + "'");
    has_exact = has_exact || f == "exact";
  }
  if (!has_exact) throw ConfigError("energy sweep: the exact formulation is required for normalization");
  if (c.n_weights < 1) throw ConfigError("energy sweep: n_weights must be positive");
  check_positive(c.weight_min, "energy sweep weight_min");
  if (c.weight_max < c.weight_min) throw ConfigError("energy sweep: weight_max < weight_min");
  if (c.steps < 2) throw ConfigError("energy sweep: steps must be at least 2");
  check_positive(c.dt, "energy sweep dt");
  if (c.alpha1 < 0 || c.alpha2 < 0 || c.boundary_velocity_weight < 0 || c.posture_weight < 0)
    throw ConfigError("energy sweep: weights must be nonnegative");
  if (c.n_trials < 1) throw ConfigError("energy sweep: n_trials must be positive");
  if (c.jobs < 1) throw ConfigError("energy sweep: jobs must be positive");
  return c;
}

json to_json(const EnergySweepConfig& c) {
  json j{{"chain", c.chain},
         {"frame", c.frame},
         {"formulations", c.formulations},
         {"n_weights", c.n_weights},
         {"weight_min", c.weight_min},
         {"weight_max", c.weight_max},
         {"steps", c.steps},
         {"dt", c.dt},
         {"alpha1", c.alpha1},
         {"alpha2", c.alpha2},
         {"boundary_velocity_weight", c.boundary_velocity_weight},
         {"posture_weight", c.posture_weight},
         {"trials_file", c.trials_file},
         {"n_trials", c.n_trials},
         {"seed", c.seed},
         {"success_violation", c.success_violation},
         {"metric_jitter", c.metric_jitter},
         {"optimizer", to_json(c.optimizer)}};
  j["posture"] = c.posture ? vec_json(*c.posture) : json(nullptr);
  return j;
}

std::vector<double> weight_grid(const EnergySweepConfig& c) {
  std::vector<double> w{0.0};
  for (double x : logspace(c.weight_min, c.weight_max, c.n_weights)) w.push_back(x);
  return w;
}

double trajectory_energy(std::shared_ptr<const KinematicChain> chain, const Trajectory& traj) {
  const std::vector<TermPtr> terms{kinetic_energy_term(std::move(chain), 1.0, traj.dt())};
  return objective_value(terms, traj, CliqueIndexing(1, traj.steps()));
}

Problem reach_problem(const EnergySweepConfig& c, std::shared_ptr<const KinematicChain> chain, const ReachTrial& trial,
                      const std::string& formulation, double weight) {
  const int d = chain->dof();
  if (trial.start.size() != d) throw ConfigError("reach problem: start has the wrong dimension");
  const VectorXd posture = c.posture.value_or(default_posture(c.chain, d));
  if (posture.size() != d) throw ConfigError("reach problem: posture has the wrong dimension");

  Problem p{Trajectory::constant(c.steps, c.dt, trial.start), {}, {}};
  for (auto& t : config_penalty_terms(d, c.alpha1, c.alpha2, c.dt)) p.terms.push_back(t);
  const auto identity = std::make_shared<IdentityMap>(d);
  auto v0 = squared_derivative_term(identity, 1, c.boundary_velocity_weight, c.dt);
  v0->set_when(TimeSelector::first());
  auto v1 = squared_derivative_term(identity, 1, c.boundary_velocity_weight, c.dt);
  v1->set_when(TimeSelector::last());
  p.terms.push_back(v0);
  p.terms.push_back(v1);
  p.terms.push_back(posture_term(posture, c.posture_weight));
  if (weight > 0.0) {
    if (formulation == "exact") p.terms.push_back(kinetic_energy_term(chain, weight, c.dt));
    else if (formulation == "cholesky") p.terms.push_back(cholesky_kinetic_energy_term(chain, weight, c.dt, c.metric_jitter));
    else throw ConfigError("reach problem: unknown formulation '" + formulation + "'");
  }
  p.constraints.push_back(goal_constraint(chain, c.frame, trial.goal));
  return p;
}

SweepReport run_energy_sweep(const EnergySweepConfig& c) {
  const auto chain = std::make_shared<const KinematicChain>(load_chain(c.chain));
  if (chain->bodies().empty()) throw ConfigError("energy sweep: chain has no bodies");
  const VectorXd posture = c.posture.value_or(default_posture(c.chain, chain->dof()));
  std::vector<ReachTrial> trials = c.trials_file.empty()
                                       ? generate_trials(*chain, posture, c.frame, c.n_trials, c.seed)
                                       : trials_from_json(json::parse(read_text(c.trials_file), nullptr, true));
  if (!c.trials_file.empty() && static_cast<int>(trials.size()) > c.n_trials) trials.resize(static_cast<std::size_t>(c.n_trials));

  const auto weights = weight_grid(c);
  const int nf = static_cast<int>(c.formulations.size());
  const int nw = static_cast<int>(weights.size());
  const int ntr = static_cast<int>(trials.size());
  std::vector<TrialRecord> records(static_cast<std::size_t>(nf * nw * ntr));
  parallel_for(nf * nw * ntr, c.jobs, [&](int idx) {
    const int fi = idx / (nw * ntr);
    const int wi = (idx / ntr) % nw;
    const int ti = idx % ntr;
    const std::string& form = c.formulations[static_cast<std::size_t>(fi)];
    TrialRecord rec;
    rec.formulation = form;
    rec.trial = ti;
    rec.weight = weights[static_cast<std::size_t>(wi)];
    try {
      const Problem p = reach_problem(c, chain, trials[static_cast<std::size_t>(ti)], form, rec.weight);
      const SolveReport s = augmented_lagrangian_solve(p, c.optimizer);
      rec.energy = trajectory_energy(chain, s.trajectory);
      rec.violation = s.violation_history.back();
      rec.termination = to_string(s.termination);
      rec.iterations = s.inner_iterations;
      rec.success = rec.violation <= c.success_violation && s.termination != Termination::line_search_failure &&
                    s.termination != Termination::solver_failure && std::isfinite(rec.energy);
    } catch (const NumericalError& e) {
      rec.termination = "solver-failure";
      rec.energy = std::numeric_limits<double>::quiet_NaN();
      rec.success = false;
    }
    records[static_cast<std::size_t>(idx)] = rec;
  });

  // Per-trial anchors from the exact formulation.
  const auto exact_index = static_cast<int>(
      std::find(c.formulations.begin(), c.formulations.end(), "exact") - c.formulations.begin());
  auto record = [&](int fi, int wi, int ti) -> TrialRecord& {
    return records[static_cast<std::size_t>((fi * nw + wi) * ntr + ti)];
  };
  for (int ti = 0; ti < ntr; ++ti) {
    const double e_max = record(exact_index, 0, ti).energy;
    const double e_min = record(exact_index, nw - 1, ti).energy;
    const double span = e_max - e_min;
    for (int fi = 0; fi < nf; ++fi)
      for (int wi = 0; wi < nw; ++wi) {
        TrialRecord& r = record(fi, wi, ti);
        r.normalized = span != 0.0 ? (r.energy - e_min) / span : 0.0;
        if (!std::isfinite(r.normalized)) r.success = false;
      }
  }

  SweepReport report;
  report.meta.kind = "energy-sweep";
  report.meta.config_hash = config_hash(to_json(c));
  report.meta.seed = c.seed;
  report.trials = records;
  for (int fi = 0; fi < nf; ++fi)
    for (bool trimmed : {false, true})
      for (int wi = 0; wi < nw; ++wi) {
        std::vector<double> xs;
        for (int ti = 0; ti < ntr; ++ti) {
          const TrialRecord& r = record(fi, wi, ti);
          if (std::isfinite(r.normalized) && (!trimmed || r.success)) xs.push_back(r.normalized);
        }
        SweepRow row;
        row.formulation = c.formulations[static_cast<std::size_t>(fi)];
        row.weight = weights[static_cast<std::size_t>(wi)];
        row.weight_normalized = row.weight / weights.back();
        std::tie(row.mean_energy, row.std_energy) = mean_std(xs);
        row.n_trials = static_cast<int>(xs.size());
        row.trimmed = trimmed;
        report.rows.push_back(row);
      }
  return report;
}

// ---------------------------------------------------------------------------
// Problem files

ProblemSpec problem_from_json(const json& doc) {
  Reader r(doc, "problem");
  const auto chain = chain_from_config(r.raw("chain"), "problem");
  const int d = chain->dof();
  const int steps = r.require<int>("steps");
  const double dt = r.require<double>("dt");
  if (steps < 1) throw ConfigError("problem: steps must be positive");
  check_positive(dt, "problem.dt");
  const VectorXd start = r.get<VectorXd>("start", VectorXd::Zero(d));
  if (start.size() != d) throw ConfigError("problem: start has the wrong dimension");
  std::vector<TermPtr> terms;
  std::vector<ConstraintPtr> constraints;
  OptimizerConfig optimizer;

  if (r.has("terms")) {
    for (const auto& item : r.raw("terms")) {
      Reader t(item, "problem term");
      const auto type = t.require<std::string>("type");
      if (type == "config_penalty") {
        for (auto& term : config_penalty_terms(d, t.get("alpha1", 0.0), t.get("alpha2", 0.0), dt))
          terms.push_back(term);
      } else if (type == "posture") {
        const VectorXd q_default = t.get<VectorXd>("default", start);
        if (q_default.size() != d) throw ConfigError("problem term posture: default has the wrong dimension");
        terms.push_back(posture_term(q_default, t.require<double>("weight")));
      } else if (type == "kinetic_energy") {
        const auto form = t.get<std::string>("formulation", "exact");
        const double w = t.require<double>("weight");
        if (form == "exact") terms.push_back(kinetic_energy_term(chain, w, dt));
        else if (form == "cholesky")
          terms.push_back(cholesky_kinetic_energy_term(chain, w, dt, t.get("jitter", 1e-8)));
        else throw ConfigError("problem term kinetic_energy: formulation must be 'exact' or 'cholesky'");
      } else if (type == "task_derivative") {
        const auto frame = t.require<std::string>("frame");
        if (!chain->has_frame(frame)) throw ConfigError("problem term task_derivative: unknown frame '" + frame + "'");
        const int k = t.require<int>("order");
        if (k != 1 && k != 2) throw ConfigError("problem term task_derivative: order must be 1 or 2");
        terms.push_back(
            squared_derivative_term(std::make_shared<PointMap>(chain, frame), k, t.require<double>("weight"), dt));
      } else if (type == "boundary_velocity") {
        const double w = t.get("weight", 0.1);
        const auto identity = std::make_shared<IdentityMap>(d);
        for (auto sel : {TimeSelector::first(), TimeSelector::last()}) {
          auto term = squared_derivative_term(identity, 1, w, dt);
          term->set_when(sel);
          terms.push_back(term);
        }
      } else if (type == "joint_limit_penalty") {
        terms.push_back(joint_limit_penalty(chain->lower_limits(), chain->upper_limits(),
                                                         t.get("margin", 0.1), t.require<double>("weight")));
      } else {
        throw ConfigError("problem: unknown term type '" + type + "'");
      }
      t.finish();
    }
  }

  if (r.has("constraints")) {
    for (const auto& item : r.raw("constraints")) {
      Reader t(item, "problem constraint");
      const auto type = t.require<std::string>("type");
      if (type == "goal") {
        const auto frame = t.get<std::string>("frame", "ee");
        if (!chain->has_frame(frame)) throw ConfigError("problem constraint goal: unknown frame '" + frame + "'");
        constraints.push_back(goal_constraint(chain, frame, t.require<Vector3d>("point")));
      } else if (type == "obstacle") {
        const auto frame = t.get<std::string>("frame", "ee");
        if (!chain->has_frame(frame)) throw ConfigError("problem constraint obstacle: unknown frame '" + frame + "'");
        const double radius = t.require<double>("radius");
        const double margin = t.get("margin", 0.0);
        if (!(radius > 0.0) || margin < 0.0) throw ConfigError("problem constraint obstacle: bad radius or margin");
        constraints.push_back(
            obstacle_constraint(chain, frame, t.require<Vector3d>("center"), radius, margin));
      } else if (type == "joint_limits") {
        const VectorXd lo = t.get<VectorXd>("lower", chain->lower_limits());
        const VectorXd hi = t.get<VectorXd>("upper", chain->upper_limits());
        if (lo.size() != d || hi.size() != d) throw ConfigError("problem constraint joint_limits: wrong dimension");
        constraints.push_back(joint_limit_constraints(lo, hi));
      } else {
        throw ConfigError("problem: unknown constraint type '" + type + "'");
      }
      t.finish();
    }
  }
  if (terms.empty() && constraints.empty())
    throw ConfigError("problem: no terms and no constraints");
  if (r.has("optimizer")) optimizer = optimizer_config_from_json(r.raw("optimizer"));
  r.finish();
  return {chain, Problem{Trajectory::constant(steps, dt, start), std::move(terms), std::move(constraints)}, optimizer,
          doc};
}

json solve_report_to_json(const SolveReport& s) {
  json configs = json::array();
  for (int i = 0; i <= s.trajectory.steps() + 1; ++i) configs.push_back(vec_json(s.trajectory.config(i)));
  return {{"termination", to_string(s.termination)},
          {"message", s.message},
          {"steps", s.trajectory.steps()},
          {"dt", s.trajectory.dt()},
          {"trajectory", configs},
          {"objective_history", s.objective_history},
          {"violation_history", s.violation_history},
          {"proxy_history", s.proxy_history},
          {"inner_iterations", s.inner_iterations},
          {"outer_iterations", s.outer_iterations},
          {"final_gradient_norm", s.final_gradient_norm},
          {"kkt_residual", s.kkt_residual},
          {"rho", s.state.rho},
          {"regularization_shifts", s.regularization_shifts},
          {"condition_estimates", s.condition_estimates},
          {"line_search_rejections", s.line_search_rejections},
          {"stalled_inner_loops", s.stalled_inner_loops},
          {"inner_line_search_failures", s.inner_line_search_failures}};
}

OptimizeReport run_optimize(const ProblemSpec& spec) {
  const SolveReport s = augmented_lagrangian_solve(spec.problem, spec.optimizer);
  OptimizeReport out;
  out.meta.kind = "optimize";
  out.meta.config_hash = config_hash(spec.source);
  out.solve = solve_report_to_json(s);
  out.converged = s.termination == Termination::converged;
  return out;
}

// ---------------------------------------------------------------------------
// Self-checks

CheckConfig check_config_from_json(const json& doc) {
  Reader r(doc, "check config");
  CheckConfig c;
  c.chain = r.get("chain", c.chain);
  c.samples = r.get("samples", c.samples);
  c.tolerance = r.get("tolerance", c.tolerance);
  c.seed = r.get("seed", c.seed);
  r.finish();
  if (c.samples < 1) throw ConfigError("check: samples must be positive");
  check_positive(c.tolerance, "check.tolerance");
  return c;
}

bool CheckReport::all_passed() const {
  return std::all_of(rows.begin(), rows.end(), [](const CheckRow& r) { return r.passed; });
}

CheckReport run_checks(const CheckConfig& c) {
  const auto chain = std::make_shared<const KinematicChain>(load_chain(c.chain));
  const int d = chain->dof();
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto random_q = [&] {
    VectorXd q(d);
    for (int i = 0; i < d; ++i) q[i] = 0.8 * unit(rng) * std::min(2.0, chain->upper_limits()[i]);
    return q;
  };

  CheckReport report;
  report.meta.kind = "check";
  report.meta.seed = c.seed;
  report.meta.config_hash = config_hash({{"chain", c.chain}, {"samples", c.samples}, {"tolerance", c.tolerance}});
  auto add = [&](std::string name, double err, double tol) {
    report.rows.push_back({std::move(name), err, tol, err <= tol});
  };

  // Task map Jacobians.
  for (const auto& f : chain->frames()) {
    const PointMap phi(chain, f.name);
    double worst = 0.0;
    for (int s = 0; s < c.samples; ++s) worst = std::max(worst, jacobian_check(phi, random_q()));
    add("jacobian:" + f.name, worst, 1e-6);
  }
  if (!chain->bodies().empty()) {
    const InertialMap phi(chain);
    double worst = 0.0;
    for (int s = 0; s < c.samples; ++s) worst = std::max(worst, jacobian_check(phi, random_q()));
    add("jacobian:inertial_map", worst, 1e-6);
  }

  // Terms and constraints on random cliques of a random smooth trajectory.
  const double dt = 0.1;
  auto random_clique = [&](int K) {
    const int steps = 6;
    const CliqueIndexing indexing(K, steps);
    const VectorXd base = random_q();
    const VectorXd vel = 0.5 * random_q();
    std::vector<VectorXd> states;
    for (int i = 1; i <= steps; ++i) states.push_back(base + i * dt * vel + 0.02 * random_q());
    const Trajectory traj(steps, dt, base, states, base + (steps + 1) * dt * vel);
    std::uniform_int_distribution<int> pick(1, indexing.num_cliques());
    return make_clique(traj, pick(rng), indexing);
  };

  std::vector<std::pair<std::string, TermPtr>> terms;
  const auto identity = std::make_shared<IdentityMap>(d);
  const std::string frame = chain->has_frame("ee") ? "ee" : (chain->frames().empty() ? "" : chain->frames()[0].name);
  if (!frame.empty()) {
    const auto point = std::make_shared<PointMap>(chain, frame);
    terms.emplace_back("task_velocity", squared_derivative_term(point, 1, 1.0, dt));
    terms.emplace_back("task_acceleration", squared_derivative_term(point, 2, 1.0, dt));
  }
  if (!chain->bodies().empty()) terms.emplace_back("kinetic_energy", kinetic_energy_term(chain, 1.0, dt));
  const auto penalties = config_penalty_terms(d, 1.0, 1.0, dt);
  terms.emplace_back("config_velocity", penalties[0]);
  terms.emplace_back("config_acceleration", penalties[1]);
  terms.emplace_back("posture", posture_term(VectorXd::Zero(d), 2.0));
  // Margins wide enough that most random configurations sit on the active hinge.
  terms.emplace_back("joint_limit_penalty",
                     joint_limit_penalty(chain->lower_limits(), chain->upper_limits(), 1.5, 3.0));
  for (const auto& [name, term] : terms) {
    double worst = 0.0;
    for (int s = 0; s < c.samples; ++s) worst = std::max(worst, gradient_check(*term, random_clique(2)));
    add("gradient:" + name, worst, c.tolerance);
  }
  {
    // The Cholesky approximation is exact for a constant metric.
    MatrixXd a(d, d);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = unit(rng);
    a = a * a.transpose() + d * MatrixXd::Identity(d, d);
    const auto metric = std::make_shared<FunctionMetric>(d, [a](const VectorXd&) { return a; });
    const MetricVelocityTerm term(metric, 1.0, dt);
    double worst = 0.0;
    for (int s = 0; s < c.samples; ++s) worst = std::max(worst, gradient_check(term, random_clique(2)));
    add("gradient:metric_velocity_constant", worst, c.tolerance);
  }

  std::vector<std::pair<std::string, ConstraintPtr>> constraints;
  if (!frame.empty()) {
    constraints.emplace_back("goal", goal_constraint(chain, frame, Vector3d(0.3, 0.2, 0.5)));
    constraints.emplace_back("obstacle", obstacle_constraint(chain, frame, Vector3d(0.2, -0.1, 0.6), 0.1, 0.05));
  }
  constraints.emplace_back("joint_limits", joint_limit_constraints(chain->lower_limits(), chain->upper_limits()));
  for (const auto& [name, con] : constraints) {
    double worst = 0.0;
    for (int s = 0; s < c.samples; ++s) worst = std::max(worst, constraint_jacobian_check(*con, random_clique(2)));
    add("constraint_jacobian:" + name, worst, c.tolerance);
  }

  // Banded assembly and solve against dense oracles.
  double assembly = 0.0, solve = 0.0;
  for (int s = 0; s < c.samples; ++s) {
    const int steps = 2 + s % 19;
    Trajectory moved = Trajectory::constant(steps, dt, random_q());
    for (Eigen::Index i = 0; i < moved.num_variables(); ++i) moved.variables()[i] += 0.1 * unit(rng);
    std::vector<TermPtr> all;
    for (const auto& [name, term] : terms) all.push_back(term);
    const CliqueIndexing indexing(2, steps);
    const AssembledObjective a = assemble(all, moved, indexing, true);
    const MatrixXd dense = assemble_dense_hessian(all, moved, indexing);
    assembly = std::max(assembly, (a.hessian.to_dense() - dense).norm() / std::max(dense.norm(), 1e-300));
    BlockBandedMatrix h = a.hessian;
    h.add_diagonal(1.0);
    const VectorXd x = banded_cholesky_solve(h, a.gradient).x;
    const VectorXd ref = (dense + MatrixXd::Identity(dense.rows(), dense.cols())).llt().solve(a.gradient);
    solve = std::max(solve, (x - ref).norm() / std::max(ref.norm(), 1e-300));
  }
  add("banded_assembly", assembly, 1e-10);
  add("banded_solve", solve, 1e-10);
  return report;
}

// ---------------------------------------------------------------------------
// Serialization

json to_json(const ConvergenceReport& r) {
  json rows = json::array(), slopes = json::array();
  for (const auto& x : r.rows)
    rows.push_back({{"k", x.k},
                    {"dt", x.dt},
                    {"mean_err", x.mean_err},
                    {"std_err", x.std_err},
                    {"mean_distance", x.mean_distance},
                    {"max_offdiag_err", x.max_offdiag_err}});
  for (const auto& s : r.slopes)
    slopes.push_back({{"k", s.k}, {"slope", s.slope}, {"intercept", s.intercept}, {"r2", s.r2}, {"n_points", s.n_points}});
  return {{"metadata", metadata_json(r.meta)}, {"rows", rows}, {"slopes", slopes}};
}

ConvergenceReport convergence_report_from_json(const json& doc) {
  try {
    ConvergenceReport r;
    r.meta = metadata_from_json(doc.at("metadata"));
    for (const auto& x : doc.at("rows"))
      r.rows.push_back({x.at("k").get<int>(), x.at("dt").get<double>(), x.at("mean_err").get<double>(),
                        x.at("std_err").get<double>(), x.at("mean_distance").get<double>(),
                        x.at("max_offdiag_err").get<double>()});
    for (const auto& s : doc.at("slopes"))
      r.slopes.push_back({s.at("k").get<int>(), s.at("slope").get<double>(), s.at("intercept").get<double>(),
                          s.at("r2").get<double>(), s.at("n_points").get<int>()});
    return r;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("convergence report: ") + e.what());
  }
}

json to_json(const SweepReport& r) {
  json rows = json::array(), trials = json::array();
  for (const auto& x : r.rows)
    rows.push_back({{"formulation", x.formulation},
                    {"weight", x.weight},
                    {"weight_normalized", x.weight_normalized},
                    {"mean_energy", x.mean_energy},
                    {"std_energy", x.std_energy},
                    {"n_trials", x.n_trials},
                    {"trimmed", x.trimmed}});
  // NaN energies of failed solves are stored as null.
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  for (const auto& t : r.trials)
    trials.push_back({{"formulation", t.formulation},
                      {"trial", t.trial},
                      {"weight", t.weight},
                      {"energy", num(t.energy)},
                      {"normalized", num(t.normalized)},
                      {"success", t.success},
                      {"termination", t.termination},
                      {"violation", num(t.violation)},
                      {"iterations", t.iterations}});
  return {{"metadata", metadata_json(r.meta)}, {"rows", rows}, {"trials", trials}};
}

SweepReport sweep_report_from_json(const json& doc) {
  auto num = [](const json& v) { return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>(); };
  try {
    SweepReport r;
    r.meta = metadata_from_json(doc.at("metadata"));
    for (const auto& x : doc.at("rows"))
      r.rows.push_back({x.at("formulation").get<std::string>(), x.at("weight").get<double>(),
                        x.at("weight_normalized").get<double>(), x.at("mean_energy").get<double>(),
                        x.at("std_energy").get<double>(), x.at("n_trials").get<int>(), x.at("trimmed").get<bool>()});
    for (const auto& t : doc.at("trials"))
      r.trials.push_back({t.at("formulation").get<std::string>(), t.at("trial").get<int>(), t.at("weight").get<double>(),
                          num(t.at("energy")), num(t.at("normalized")), t.at("success").get<bool>(),
                          t.at("termination").get<std::string>(), num(t.at("violation")),
                          t.at("iterations").get<int>()});
    return r;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("sweep report: ") + e.what());
  }
}

json to_json(const OptimizeReport& r) {
  return {{"metadata", metadata_json(r.meta)}, {"converged", r.converged}, {"solve", r.solve}};
}

json to_json(const CheckReport& r) {
  json rows = json::array();
  for (const auto& x : r.rows)
    rows.push_back({{"check", x.name}, {"max_error", x.max_error}, {"tolerance", x.tolerance}, {"passed", x.passed}});
  return {{"metadata", metadata_json(r.meta)}, {"all_passed", r.all_passed()}, {"rows", rows}};
}

std::string to_csv(const ConvergenceReport& r) {
  std::ostringstream os;
  os << "k,dt,mean_err,std_err\n";
  for (const auto& x : r.rows) os << x.k << ',' << fmt(x.dt) << ',' << fmt(x.mean_err) << ',' << fmt(x.std_err) << '\n';
  return os.str();
}

std::string slopes_csv(const ConvergenceReport& r) {
  std::ostringstream os;
  os << "k,slope,intercept,r2,n_points\n";
  for (const auto& s : r.slopes)
    os << s.k << ',' << fmt(s.slope) << ',' << fmt(s.intercept) << ',' << fmt(s.r2) << ',' << s.n_points << '\n';
  return os.str();
}

std::string to_csv(const SweepReport& r) {
  std::ostringstream os;
  os << "formulation,weight_normalized,mean_energy,std_energy,n_trials,trimmed_flag\n";
  for (const auto& x : r.rows)
    os << x.formulation << ',' << fmt(x.weight_normalized) << ',' << fmt(x.mean_energy) << ',' << fmt(x.std_energy)
       << ',' << x.n_trials << ',' << (x.trimmed ? 1 : 0) << '\n';
  return os.str();
}

std::string to_csv(const OptimizeReport& r) {
  std::ostringstream os;
  const auto& traj = r.solve.at("trajectory");
  const std::size_t d = traj.empty() ? 0 : traj.at(0).size();
  os << "i,t";
  for (std::size_t j = 0; j < d; ++j) os << ",q" << j;
  os << '\n';
  const double dt = r.solve.at("dt").get<double>();
  for (std::size_t i = 0; i < traj.size(); ++i) {
    os << i << ',' << fmt(static_cast<double>(i) * dt);
    for (const auto& v : traj.at(i)) os << ',' << fmt(v.get<double>());
    os << '\n';
  }
  return os.str();
}

std::string to_csv(const CheckReport& r) {
  std::ostringstream os;
  os << "check,max_error,tolerance,passed\n";
  for (const auto& x : r.rows) os << x.name << ',' << fmt(x.max_error) << ',' << fmt(x.tolerance) << ',' << (x.passed ? 1 : 0) << '\n';
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.close();
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string slopes_path(const std::string& path) {
  const std::filesystem::path p(path);
  return (p.parent_path() / (p.stem().string() + "_slopes.csv")).string();
}

}  // namespace gnh
