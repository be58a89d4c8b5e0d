#include "gnh/objective.hpp"

#include "gnh/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gnh {

PointMap::PointMap(std::shared_ptr<const KinematicChain> chain, std::string frame)
    : chain_(std::move(chain)), frame_(std::move(frame)) {
  if (!chain_->has_frame(frame_)) throw std::invalid_argument("PointMap: unknown frame '" + frame_ + "'");
}

VectorXd PointMap::map(const VectorXd& q) const {
  const NamedFrame& f = chain_->frame(frame_);
  return point_position(forward_kinematics(*chain_, q), f.link, f.point);
}

MatrixXd PointMap::jacobian(const VectorXd& q) const { return jacobian_point(*chain_, q, frame_); }

InertialMap::InertialMap(std::shared_ptr<const KinematicChain> chain) : chain_(std::move(chain)) {
  if (chain_->bodies().empty()) throw std::invalid_argument("InertialMap: chain has no bodies");
}

std::vector<int> Clique::owned_offsets() const {
  std::vector<int> out{indexing.current_offset()};
  if (is_last())
    for (int i = indexing.current_offset() + 1; i < window(); ++i) out.push_back(i);
  return out;
}

Clique make_clique(const Trajectory& traj, int t, const CliqueIndexing& indexing) {
  Clique c;
  c.q = extract_clique(traj, t, indexing);
  c.t = t;
  c.d = traj.dof();
  c.indexing = indexing;
  c.dt = traj.dt();
  return c;
}

bool TimeSelector::matches(const Clique& c) const {
  switch (kind) {
    case Kind::every: return true;
    case Kind::first: return c.is_first();
    case Kind::last: return c.is_last();
    case Kind::final_step: return c.indexing.start(c.t) + c.indexing.current_offset() == c.indexing.steps;
  }
  return false;
}

// ---------------------------------------------------------------------------

SquaredDerivativeTerm::SquaredDerivativeTerm(std::shared_ptr<const TaskMap> phi, FiniteDiffOperator op,
                                             double weight, bool integrate_dt, std::string name)
    : phi_(std::move(phi)), op_(std::move(op)), weight_(weight), integrate_dt_(integrate_dt), name_(std::move(name)) {
  if (weight < 0.0) throw std::invalid_argument("squared derivative term: negative weight");
}

TermEval SquaredDerivativeTerm::evaluate(const Clique& c, bool want_gradient, bool want_hessian) const {
  const int k = op_.order();
  const int w = c.window();
  if (w < k + 1) throw std::invalid_argument(name_ + ": clique narrower than the stencil");
  const int d = c.d;
  const double factor = weight_ * (integrate_dt_ ? op_.dt() : 1.0);

  std::vector<MatrixXd> jac;
  VectorXd r = VectorXd::Zero(phi_->output_dim());
  for (int i = 0; i <= k; ++i) {
    const VectorXd qi = c.config(i);
    r += op_.coefficient(i) * phi_->map(qi);
    if (want_gradient || want_hessian) jac.push_back(phi_->jacobian(qi));
  }

  TermEval out;
  out.value = 0.5 * factor * r.squaredNorm();
  const auto n = static_cast<Eigen::Index>(w) * d;
  if (want_gradient) {
    out.gradient = VectorXd::Zero(n);
    for (int i = 0; i <= k; ++i)
      out.gradient.segment(static_cast<Eigen::Index>(i) * d, d) =
          factor * op_.coefficient(i) * (jac[static_cast<std::size_t>(i)].transpose() * r);
  }
  if (want_hessian) {
    out.hessian = MatrixXd::Zero(n, n);
    for (int i = 0; i <= k; ++i)
      for (int j = 0; j <= i; ++j) {
        const MatrixXd blk = factor * op_.coefficient(i) * op_.coefficient(j) *
                             (jac[static_cast<std::size_t>(i)].transpose() * jac[static_cast<std::size_t>(j)]);
        out.hessian.block(static_cast<Eigen::Index>(i) * d, static_cast<Eigen::Index>(j) * d, d, d) = blk;
        if (i != j) out.hessian.block(static_cast<Eigen::Index>(j) * d, static_cast<Eigen::Index>(i) * d, d, d) = blk.transpose();
      }
  }
  return out;
}

PostureTerm::PostureTerm(VectorXd q_default, double weight) : q_default_(std::move(q_default)), weight_(weight) {
  if (weight < 0.0) throw std::invalid_argument("posture term: negative weight");
}

TermEval PostureTerm::evaluate(const Clique& c, bool want_gradient, bool want_hessian) const {
  if (c.d != q_default_.size()) throw std::invalid_argument("posture term: dimension mismatch");
  const auto n = static_cast<Eigen::Index>(c.window()) * c.d;
  TermEval out;
  if (want_gradient) out.gradient = VectorXd::Zero(n);
  if (want_hessian) out.hessian = MatrixXd::Zero(n, n);
  for (int i : c.owned_offsets()) {
    const VectorXd diff = c.config(i) - q_default_;
    const auto o = static_cast<Eigen::Index>(i) * c.d;
    out.value += 0.5 * weight_ * diff.squaredNorm();
    if (want_gradient) out.gradient.segment(o, c.d) = weight_ * diff;
    if (want_hessian) out.hessian.block(o, o, c.d, c.d).diagonal().setConstant(weight_);
  }
  return out;
}

JointLimitPenalty::JointLimitPenalty(VectorXd q_min, VectorXd q_max, double margin, double weight)
    : lo_(q_min.array() + margin), hi_(q_max.array() - margin), weight_(weight) {
  if (q_min.size() != q_max.size()) throw std::invalid_argument("joint limit penalty: bound size mismatch");
  if ((q_min.array() >= q_max.array()).any()) throw std::invalid_argument("joint limit penalty: q_min >= q_max");
  if (margin < 0.0) throw std::invalid_argument("joint limit penalty: negative margin");
}

TermEval JointLimitPenalty::evaluate(const Clique& c, bool want_gradient, bool want_hessian) const {
  if (c.d != lo_.size()) throw std::invalid_argument("joint limit penalty: dimension mismatch");
  const auto n = static_cast<Eigen::Index>(c.window()) * c.d;
  TermEval out;
  if (want_gradient) out.gradient = VectorXd::Zero(n);
  if (want_hessian) out.hessian = MatrixXd::Zero(n, n);
  for (int i : c.owned_offsets()) {
    const VectorXd q = c.config(i);
    const auto o = static_cast<Eigen::Index>(i) * c.d;
    for (Eigen::Index j = 0; j < c.d; ++j) {
      // hinge residual with sign; exactly at the kink both derivatives are 0
      double r = 0.0;
      if (q[j] > hi_[j]) r = q[j] - hi_[j];
      else if (q[j] < lo_[j]) r = q[j] - lo_[j];
      if (r == 0.0) continue;
      out.value += weight_ * r * r;
      if (want_gradient) out.gradient[o + j] = 2.0 * weight_ * r;
      if (want_hessian) out.hessian(o + j, o + j) = 2.0 * weight_;
    }
  }
  return out;
}

std::shared_ptr<SquaredDerivativeTerm> squared_derivative_term(std::shared_ptr<const TaskMap> phi, int k,
                                                               double weight, double dt) {
  return std::make_shared<SquaredDerivativeTerm>(std::move(phi), make_fd_operator(k, dt), weight, true,
                                                 k == 1 ? "squared_velocity" : "squared_acceleration");
}

std::shared_ptr<SquaredDerivativeTerm> kinetic_energy_term(std::shared_ptr<const KinematicChain> chain,
                                                           double weight, double dt) {
  return std::make_shared<SquaredDerivativeTerm>(std::make_shared<InertialMap>(std::move(chain)),
                                                 make_fd_operator(1, dt), weight, true, "kinetic_energy");
}

std::vector<TermPtr> config_penalty_terms(int d, double alpha1, double alpha2, double dt) {
  if (alpha1 < 0.0 || alpha2 < 0.0) throw std::invalid_argument("config penalties: negative alpha");
  auto id = std::make_shared<IdentityMap>(d);
  // alpha |D q|^2 dt  ==  (w/2) |D q|^2 dt  with w = 2 alpha
  return {std::make_shared<SquaredDerivativeTerm>(id, make_fd_operator(1, dt), 2.0 * alpha1, true, "config_velocity"),
          std::make_shared<SquaredDerivativeTerm>(id, make_fd_operator(2, dt), 2.0 * alpha2, true,
                                                  "config_acceleration")};
}

std::shared_ptr<PostureTerm> posture_term(VectorXd q_default, double weight) {
  return std::make_shared<PostureTerm>(std::move(q_default), weight);
}

std::shared_ptr<JointLimitPenalty> joint_limit_penalty(VectorXd q_min, VectorXd q_max, double margin, double weight) {
  return std::make_shared<JointLimitPenalty>(std::move(q_min), std::move(q_max), margin, weight);
}

// ---------------------------------------------------------------------------

int clique_order(const std::vector<TermPtr>& terms, int minimum) {
  int k = minimum;
  for (const auto& t : terms) k = std::max(k, t->order());
  return k;
}

namespace {

void check_terms(const std::vector<TermPtr>& terms, const Trajectory& traj, const CliqueIndexing& indexing) {
  if (indexing.steps != traj.steps()) throw std::invalid_argument("assemble: indexing built for a different T");
  for (const auto& term : terms) {
    if (term->order() > indexing.order)
      throw std::invalid_argument("assemble: term '" + term->name() + "' needs order " + std::to_string(term->order()) +
                                  " but cliques have order " + std::to_string(indexing.order));
    if (auto dt = term->dt(); dt && std::abs(*dt - traj.dt()) > 1e-12 * traj.dt())
      throw std::invalid_argument("assemble: term '" + term->name() + "' was built for a different dt");
  }
}

}  // namespace

AssembledObjective assemble(const std::vector<TermPtr>& terms, const Trajectory& traj, const CliqueIndexing& indexing,
                            bool want_hessian) {
  check_terms(terms, traj, indexing);
  const int d = traj.dof();
  AssembledObjective out;
  out.gradient = VectorXd::Zero(traj.num_variables());
  if (want_hessian) out.hessian = BlockBandedMatrix(traj.steps() + 1, d, indexing.order);
  for (int t = 1; t <= indexing.num_cliques(); ++t) {
    const Clique c = make_clique(traj, t, indexing);
    for (const auto& term : terms) {
      if (!term->when().matches(c)) continue;
      const TermEval e = term->evaluate(c, true, want_hessian);
      out.value += e.value;
      scatter_clique(e.gradient, t, indexing, d, out.gradient);
      if (want_hessian) scatter_clique(e.hessian, t, indexing, d, out.hessian);
    }
  }
  return out;
}

AssembledObjective assemble(const std::vector<TermPtr>& terms, const Trajectory& traj) {
  return assemble(terms, traj, CliqueIndexing(clique_order(terms), traj.steps()));
}

double objective_value(const std::vector<TermPtr>& terms, const Trajectory& traj, const CliqueIndexing& indexing) {
  check_terms(terms, traj, indexing);
  double value = 0.0;
  for (int t = 1; t <= indexing.num_cliques(); ++t) {
    const Clique c = make_clique(traj, t, indexing);
    for (const auto& term : terms)
      if (term->when().matches(c)) value += term->value(c);
  }
  return value;
}

MatrixXd assemble_dense_hessian(const std::vector<TermPtr>& terms, const Trajectory& traj,
                                const CliqueIndexing& indexing) {
  check_terms(terms, traj, indexing);
  MatrixXd h = MatrixXd::Zero(traj.num_variables(), traj.num_variables());
  for (int t = 1; t <= indexing.num_cliques(); ++t) {
    const Clique c = make_clique(traj, t, indexing);
    for (const auto& term : terms)
      if (term->when().matches(c)) scatter_clique_dense(term->gn_hessian(c), t, indexing, traj.dof(), h);
  }
  return h;
}

// ---------------------------------------------------------------------------

namespace {

VectorXd gradient_at(const std::vector<TermPtr>& terms, const Trajectory& traj, const CliqueIndexing& indexing,
                     const VectorXd& vars) {
  return assemble(terms, traj.with_variables(vars), indexing, false).gradient;
}

double value_at(const std::vector<TermPtr>& terms, const Trajectory& traj, const CliqueIndexing& indexing,
                const VectorXd& vars) {
  return objective_value(terms, traj.with_variables(vars), indexing);
}

// Block (i, j) of the Hessian (0-based variable blocks) with a single step h.
MatrixXd fd_block_once(const std::vector<TermPtr>& terms, const Trajectory& traj, const CliqueIndexing& indexing,
                       int bi, int bj, double h, FdHessianOptions::Scheme scheme) {
  const int d = traj.dof();
  const VectorXd& x = traj.variables();
  MatrixXd out(d, d);
  if (scheme == FdHessianOptions::Scheme::gradient) {
    for (int c = 0; c < d; ++c) {
      VectorXd xp = x, xm = x;
      xp[bj * d + c] += h;
      xm[bj * d + c] -= h;
      const VectorXd gp = gradient_at(terms, traj, indexing, xp);
      const VectorXd gm = gradient_at(terms, traj, indexing, xm);
      out.col(c) = (gp.segment(bi * d, d) - gm.segment(bi * d, d)) / (2.0 * h);
    }
    return out;
  }
  const double f0 = value_at(terms, traj, indexing, x);
  auto f = [&](int a, double sa, int b, double sb) {
    VectorXd y = x;
    y[a] += sa;
    y[b] += sb;
    return value_at(terms, traj, indexing, y);
  };
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) {
      const int a = bi * d + r;
      const int b = bj * d + c;
      if (a == b) {
        out(r, c) = (f(a, h, a, 0.0) - 2.0 * f0 + f(a, -h, a, 0.0)) / (h * h);
      } else {
        out(r, c) = (f(a, h, b, h) - f(a, h, b, -h) - f(a, -h, b, h) + f(a, -h, b, -h)) / (4.0 * h * h);
      }
    }
  return out;
}

}  // namespace

MatrixXd fd_hessian_block(const std::vector<TermPtr>& terms, const Trajectory& traj, const CliqueIndexing& indexing,
                          int i, int j, const FdHessianOptions& options) {
  const int n = traj.steps() + 1;
  if (i < 1 || i > n || j < 1 || j > n) throw std::out_of_range("fd_hessian_block: configuration index out of range");
  const double h = options.step.value_or(std::max(1e-4, 1e-4 * traj.variables().cwiseAbs().maxCoeff()));
  MatrixXd block = fd_block_once(terms, traj, indexing, i - 1, j - 1, h, options.scheme);
  if (options.richardson) {
    const MatrixXd half = fd_block_once(terms, traj, indexing, i - 1, j - 1, 0.5 * h, options.scheme);
    block = (4.0 * half - block) / 3.0;
  }
  return block;
}

HessianComparison full_hessian_fd(const std::vector<TermPtr>& terms, const Trajectory& traj, int t, double scale,
                                  const FdHessianOptions& options) {
  const CliqueIndexing indexing(clique_order(terms), traj.steps());
  HessianComparison out;
  out.t = t;
  out.scale = scale;
  MatrixXd h = fd_hessian_block(terms, traj, indexing, t, t, options);
  const double norm = h.norm();
  out.asymmetry = norm > 0.0 ? (h - h.transpose()).norm() / norm : 0.0;
  if (out.asymmetry > options.asymmetry_tolerance) {
    std::ostringstream os;
    os << "full_hessian_fd: FD Hessian asymmetry " << out.asymmetry << " at t=" << t << " (step too large or too small)";
    throw NumericalError(os.str());
  }
  h = 0.5 * (h + h.transpose());
  const AssembledObjective a = assemble(terms, traj, indexing, true);
  out.true_block = scale * h;
  out.gn_block = scale * a.hessian.block(t - 1, t - 1);
  out.distance = (out.true_block - out.gn_block).norm();
  const double denom = out.true_block.norm();
  out.err = denom > 0.0 ? out.distance / denom : out.distance;
  return out;
}

// ---------------------------------------------------------------------------

double gradient_check(const CliqueTerm& term, const Clique& c, double h) {
  const VectorXd g = term.gradient(c);
  VectorXd fd(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    Clique p = c, m = c;
    p.q[i] += h;
    m.q[i] -= h;
    fd[i] = (term.value(p) - term.value(m)) / (2.0 * h);
  }
  return (fd - g).cwiseAbs().maxCoeff() / std::max(g.cwiseAbs().maxCoeff(), 1.0);
}

double jacobian_check(const TaskMap& phi, const VectorXd& q, double h) {
  const MatrixXd jac = phi.jacobian(q);
  MatrixXd fd(jac.rows(), jac.cols());
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    VectorXd p = q, m = q;
    p[i] += h;
    m[i] -= h;
    fd.col(i) = (phi.map(p) - phi.map(m)) / (2.0 * h);
  }
  return (fd - jac).cwiseAbs().maxCoeff() / std::max(jac.cwiseAbs().maxCoeff(), 1.0);
}

}  // namespace gnh
