#include "doctest.h"

#include "gnh/banded.hpp"
#include "gnh/trajectory.hpp"

#include <cmath>
#include <random>

using namespace gnh;

namespace {

VectorXd scalar(double x) { return VectorXd::Constant(1, x); }

// T=3, d=1, q_i = i
Trajectory ramp(int T, int d = 1) {
  std::vector<VectorXd> states;
  for (int i = 1; i <= T; ++i) states.push_back(VectorXd::Constant(d, i));
  return Trajectory(T, 0.1, VectorXd::Zero(d), states, VectorXd::Constant(d, T + 1));
}

}  // namespace

TEST_CASE("default stencils") {
  const auto v = make_fd_operator(1, 0.1);
  CHECK(v.coefficient(0) == doctest::Approx(-10.0));
  CHECK(v.coefficient(1) == doctest::Approx(10.0));
  const auto a = make_fd_operator(2, 0.5);
  CHECK(a.coefficient(0) == doctest::Approx(4.0));
  CHECK(a.coefficient(1) == doctest::Approx(-8.0));
  CHECK(a.coefficient(2) == doctest::Approx(4.0));
  CHECK(a.sum_sq() == 6.0);
  CHECK_THROWS_AS(make_fd_operator(3, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(FiniteDiffOperator(1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(FiniteDiffOperator(1, 0.1, {1.0}), std::invalid_argument);
}

TEST_CASE("apply_fd examples") {
  const std::vector<VectorXd> constant{scalar(3.0), scalar(3.0)};
  CHECK(apply_fd(make_fd_operator(1, 1.0), constant)(0) == 0.0);

  const std::vector<VectorXd> c13{scalar(1.0), scalar(3.0)};
  CHECK(apply_fd(make_fd_operator(1, 1.0), c13)(0) == doctest::Approx(2.0));

  const std::vector<VectorXd> sq{scalar(0.0), scalar(1.0), scalar(4.0)};
  CHECK(apply_fd(make_fd_operator(2, 1.0), sq)(0) == doctest::Approx(2.0));

  const std::vector<VectorXd> s{scalar(std::sin(0.0)), scalar(std::sin(0.05))};
  const double expected = (std::sin(0.05) - std::sin(0.0)) / 0.05;
  CHECK(apply_fd(make_fd_operator(1, 0.05), s)(0) == doctest::Approx(expected).epsilon(1e-15));
  CHECK(expected == doctest::Approx(0.99958).epsilon(1e-5));
}

TEST_CASE("apply_fd zero-pads a wider clique and rejects a narrower one") {
  const std::vector<VectorXd> c{scalar(1.0), scalar(3.0), scalar(100.0)};
  CHECK(apply_fd(make_fd_operator(1, 1.0), c)(0) == doctest::Approx(2.0));
  const std::vector<VectorXd> narrow{scalar(1.0)};
  CHECK_THROWS_AS(apply_fd(make_fd_operator(1, 1.0), narrow), std::invalid_argument);
}

TEST_CASE("stencils differentiate low-degree polynomials exactly") {
  for (double dt : {1e-3, 1e-2, 0.1, 1.0}) {
    const double t0 = 0.3;
    auto lin = [](double t) { return 2.0 - 5.0 * t; };
    const std::vector<VectorXd> v{scalar(lin(t0)), scalar(lin(t0 + dt))};
    CHECK(apply_fd(make_fd_operator(1, dt), v)(0) == doctest::Approx(-5.0).epsilon(1e-9));
    auto quad = [](double t) { return 1.0 + t + 3.0 * t * t; };
    const std::vector<VectorXd> a{scalar(quad(t0)), scalar(quad(t0 + dt)), scalar(quad(t0 + 2 * dt))};
    // cancellation error grows like eps / dt^2
    CHECK(apply_fd(make_fd_operator(2, dt), a)(0) == doctest::Approx(6.0).epsilon(1e-9 / (dt * dt)));
  }
}

TEST_CASE("clique indexing") {
  const CliqueIndexing k0(0, 3);
  CHECK(k0.num_cliques() == 4);
  CHECK(k0.start(1) == 1);
  const CliqueIndexing k1(1, 3);
  CHECK(k1.num_cliques() == 4);
  CHECK(k1.start(1) == 0);
  CHECK(k1.current_offset() == 1);
  const CliqueIndexing k2(2, 3);
  CHECK(k2.num_cliques() == 3);
  CHECK_THROWS_AS(CliqueIndexing(5, 3), std::invalid_argument);
}

TEST_CASE("extract_clique examples") {
  const Trajectory traj = ramp(3);
  const VectorXd a = extract_clique(traj, 1, CliqueIndexing(1, 3));
  CHECK(a(0) == 0.0);
  CHECK(a(1) == 1.0);
  const VectorXd b = extract_clique(traj, 3, CliqueIndexing(2, 3));
  CHECK(b(0) == 2.0);
  CHECK(b(1) == 3.0);
  CHECK(b(2) == 4.0);
  const VectorXd c = extract_clique(traj, 2, CliqueIndexing(1, 3));
  CHECK(c(0) == 1.0);
  CHECK(c(1) == 2.0);
  CHECK_THROWS_AS(extract_clique(traj, 5, CliqueIndexing(1, 3)), std::out_of_range);
}

TEST_CASE("trajectory variables and validation") {
  Trajectory traj = ramp(3, 2);
  CHECK(traj.num_variables() == 8);
  CHECK(traj.config(0).isZero());
  CHECK(traj.config(4)(1) == 4.0);
  traj.set_config(2, VectorXd::Constant(2, -1.0));
  CHECK(traj.variables()(2) == -1.0);
  CHECK_THROWS_AS(traj.set_config(0, VectorXd::Zero(2)), std::out_of_range);
  CHECK_THROWS_AS(Trajectory(3, 0.1, VectorXd::Zero(2), {}, VectorXd::Zero(2)), std::invalid_argument);
  CHECK_THROWS_AS(Trajectory::constant(0, 0.1, VectorXd::Zero(2)), std::invalid_argument);
  const Trajectory moved = traj.with_variables(VectorXd::Ones(8));
  CHECK(moved.config(3).isOnes());
  CHECK(moved.prefix().isZero());
}

TEST_CASE("scatter_clique drops prefix rows") {
  const CliqueIndexing idx(1, 2);
  BlockBandedMatrix h(3, 1, 1);
  scatter_clique(MatrixXd::Identity(2, 2), 1, idx, 1, h);
  const MatrixXd dense = h.to_dense();
  CHECK(dense(0, 0) == 1.0);
  CHECK(dense.sum() == 1.0);

  scatter_clique(MatrixXd::Identity(2, 2), 2, idx, 1, h);
  CHECK(h.to_dense()(0, 0) == 2.0);
  CHECK(h.to_dense()(1, 1) == 1.0);

  VectorXd g = VectorXd::Zero(3);
  scatter_clique(VectorXd::Ones(2), 1, idx, 1, g);
  scatter_clique(VectorXd::Ones(2), 2, idx, 1, g);
  CHECK(g(0) == 2.0);
  CHECK(g(1) == 1.0);
  CHECK(g(2) == 0.0);
}

TEST_CASE("banded and dense scatter agree on random 3-cliques") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  const int T = 6, d = 2, K = 2;
  const CliqueIndexing idx(K, T);
  BlockBandedMatrix banded(T + 1, d, K);
  MatrixXd dense = MatrixXd::Zero((T + 1) * d, (T + 1) * d);
  for (int t = 1; t <= idx.num_cliques(); ++t) {
    MatrixXd b((K + 1) * d, (K + 1) * d);
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = n(rng);
    b = (b + b.transpose()).eval();
    scatter_clique(b, t, idx, d, banded);
    scatter_clique_dense(b, t, idx, d, dense);
  }
  CHECK((banded.to_dense() - dense).cwiseAbs().maxCoeff() == 0.0);
}
