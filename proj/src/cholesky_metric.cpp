#include "gnh/cholesky_metric.hpp"

#include "gnh/errors.hpp"

#include <cmath>
#include <sstream>

namespace gnh {

MatrixXd InertiaMetric::evaluate(const VectorXd& q) const {
  MatrixXd m = inertia_matrix(*chain_, q);
  if (jitter_ > 0.0) m.diagonal().array() += jitter_;
  return m;
}

CholeskyPair cholesky_factor(const MatrixXd& a, const VectorXd& q) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("cholesky_factor: matrix is not square");
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument("cholesky_factor: matrix is not symmetric");

  // row-oriented upper factor: A = C^T C
  MatrixXd c = MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double pivot = a(i, i);
    for (Eigen::Index k = 0; k < i; ++k) pivot -= c(k, i) * c(k, i);
    if (!(pivot > kMinCholeskyPivot)) {
      std::ostringstream os;
      os << "cholesky_factor: metric not positive definite (pivot " << i << " = " << pivot << ")";
      throw NumericalError(os.str());
    }
    c(i, i) = std::sqrt(pivot);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double s = a(i, j);
      for (Eigen::Index k = 0; k < i; ++k) s -= c(k, i) * c(k, j);
      c(i, j) = s / c(i, i);
    }
  }
  return {std::move(c), q};
}

namespace {

void check_points(const MetricField& metric, const VectorXd& q_prev, const VectorXd& q_curr) {
  if (q_prev.size() != metric.dim() || q_curr.size() != metric.dim())
    throw std::invalid_argument("metric velocity: configuration dimension mismatch");
}

}  // namespace

VectorXd metric_velocity_gradient(const MetricField& metric, const VectorXd& q_prev, const VectorXd& q_curr) {
  check_points(metric, q_prev, q_curr);
  const MatrixXd a_prev = metric.evaluate(q_prev);
  const MatrixXd a_curr = metric.evaluate(q_curr);
  cholesky_factor(a_prev, q_prev);  // validates positive definiteness
  cholesky_factor(a_curr, q_curr);
  const VectorXd dq = q_curr - q_prev;
  const auto d = static_cast<Eigen::Index>(metric.dim());
  VectorXd g(2 * d);
  g.head(d) = -(a_prev * dq);
  g.tail(d) = a_curr * dq;
  return g;
}

MatrixXd metric_velocity_gn_hessian(const MetricField& metric, const VectorXd& q_prev, const VectorXd& q_curr) {
  check_points(metric, q_prev, q_curr);
  const MatrixXd a_prev = metric.evaluate(q_prev);
  const MatrixXd a_curr = metric.evaluate(q_curr);
  const CholeskyPair c_prev = cholesky_factor(a_prev, q_prev);
  const CholeskyPair c_curr = cholesky_factor(a_curr, q_curr);
  const auto d = static_cast<Eigen::Index>(metric.dim());
  MatrixXd h(2 * d, 2 * d);
  const MatrixXd cross = -(c_prev.upper.transpose() * c_curr.upper);
  // symmetric halves of A so the result is exactly symmetric
  h.topLeftCorner(d, d) = 0.5 * (a_prev + a_prev.transpose());
  h.bottomRightCorner(d, d) = 0.5 * (a_curr + a_curr.transpose());
  h.topRightCorner(d, d) = cross;
  h.bottomLeftCorner(d, d) = cross.transpose();
  return h;
}

MetricVelocityTerm::MetricVelocityTerm(std::shared_ptr<const MetricField> metric, double weight, double dt)
    : metric_(std::move(metric)), weight_(weight), dt_(dt) {
  if (weight < 0.0) throw std::invalid_argument("metric velocity term: negative weight");
  if (!(dt > 0.0)) throw std::invalid_argument("metric velocity term: dt must be positive");
}

TermEval MetricVelocityTerm::evaluate(const Clique& c, bool want_gradient, bool want_hessian) const {
  if (c.window() < 2) throw std::invalid_argument("metric velocity term: clique narrower than 2");
  const int d = c.d;
  const auto n = static_cast<Eigen::Index>(c.window()) * d;
  const VectorXd q_prev = c.config(0);
  const VectorXd q_curr = c.config(1);
  const VectorXd dq = q_curr - q_prev;
  // (w/2) |dq/dt|^2_A dt = (w/dt) * 1/2 |dq|^2_A
  const double factor = weight_ / dt_;

  TermEval out;
  const MatrixXd a_mid = 0.5 * (metric_->evaluate(q_prev) + metric_->evaluate(q_curr));
  out.value = 0.5 * factor * dq.dot(a_mid * dq);
  if (want_gradient) {
    out.gradient = VectorXd::Zero(n);
    out.gradient.head(2 * d) = factor * metric_velocity_gradient(*metric_, q_prev, q_curr);
  }
  if (want_hessian) {
    out.hessian = MatrixXd::Zero(n, n);
    out.hessian.topLeftCorner(2 * d, 2 * d) = factor * metric_velocity_gn_hessian(*metric_, q_prev, q_curr);
  }
  return out;
}

std::shared_ptr<MetricVelocityTerm> cholesky_kinetic_energy_term(std::shared_ptr<const KinematicChain> chain,
                                                                 double weight, double dt, double jitter) {
  return std::make_shared<MetricVelocityTerm>(std::make_shared<InertiaMetric>(std::move(chain), jitter), weight, dt);
}

}  // namespace gnh
