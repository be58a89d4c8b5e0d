#pragma once

#include "gnh/kinematics.hpp"
#include "gnh/objective.hpp"

#include <functional>
#include <memory>

namespace gnh {

/// Smooth symmetric positive definite Riemannian metric A(q).
class MetricField {
 public:
  virtual ~MetricField() = default;
  virtual int dim() const = 0;
  virtual MatrixXd evaluate(const VectorXd& q) const = 0;
};

class FunctionMetric final : public MetricField {
 public:
  FunctionMetric(int dim, std::function<MatrixXd(const VectorXd&)> fn) : dim_(dim), fn_(std::move(fn)) {}
  int dim() const override { return dim_; }
  MatrixXd evaluate(const VectorXd& q) const override { return fn_(q); }

 private:
  int dim_;
  std::function<MatrixXd(const VectorXd&)> fn_;
};

/// Configuration-space inertia matrix M(q), optionally with a diagonal jitter.
class InertiaMetric final : public MetricField {
 public:
  explicit InertiaMetric(std::shared_ptr<const KinematicChain> chain, double jitter = 0.0)
      : chain_(std::move(chain)), jitter_(jitter) {}
  int dim() const override { return chain_->dof(); }
  MatrixXd evaluate(const VectorXd& q) const override;

 private:
  std::shared_ptr<const KinematicChain> chain_;
  double jitter_;
};

/// A = C^T C with C upper triangular and a positive diagonal.
struct CholeskyPair {
  MatrixXd upper;
  VectorXd q;
};

/// Pivots at or below this value are treated as a non-positive-definite metric.
inline constexpr double kMinCholeskyPivot = 1e-10;

/// Throws NumericalError naming the failing pivot when A is not (numerically) PD,
/// std::invalid_argument when A is not symmetric.
CholeskyPair cholesky_factor(const MatrixXd& a, const VectorXd& q = VectorXd());

/// Approximate gradient of l = 1/2 |phi(q_curr) - phi(q_prev)|^2 when only A = J^T J is known:
/// (-A(q_prev) dq ; A(q_curr) dq) with dq = q_curr - q_prev.
VectorXd metric_velocity_gradient(const MetricField& metric, const VectorXd& q_prev, const VectorXd& q_curr);

/// Approximate Gauss-Newton Hessian [[A_prev, -C_prev^T C_curr], [-C_curr^T C_prev, A_curr]].
MatrixXd metric_velocity_gn_hessian(const MetricField& metric, const VectorXd& q_prev, const VectorXd& q_curr);

/// Velocity term (w/2) qdot^T A(q) qdot dt on the first two configurations of each clique,
/// using the Cholesky approximations for its derivatives. The value uses the average of
/// the metric at both ends, so value and gradient agree only to first order in dq.
class MetricVelocityTerm final : public CliqueTerm {
 public:
  MetricVelocityTerm(std::shared_ptr<const MetricField> metric, double weight, double dt);
  int order() const override { return 1; }
  std::optional<double> dt() const override { return dt_; }
  std::string name() const override { return "metric_velocity"; }
  TermEval evaluate(const Clique& c, bool want_gradient, bool want_hessian) const override;

 private:
  std::shared_ptr<const MetricField> metric_;
  double weight_;
  double dt_;
};

/// Configuration-space kinetic energy 1/2 qdot^T M(q) qdot with Cholesky-approximated curvature.
std::shared_ptr<MetricVelocityTerm> cholesky_kinetic_energy_term(std::shared_ptr<const KinematicChain> chain,
                                                                 double weight, double dt, double jitter = 1e-8);

}  // namespace gnh
