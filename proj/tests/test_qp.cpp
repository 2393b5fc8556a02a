#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "gptraj/qp.h"
#include "test_helpers.h"

using namespace gptraj;
using test::uniform;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Oracle: enumerate active sets, solve the KKT system, check primal
// feasibility and sign of the inequality multipliers.
struct OracleResult {
  bool feasible = false;
  VectorXd x;
  double objective = 1e300;
};

OracleResult brute_force_qp(const MatrixXd& h, const VectorXd& g,
                            const MatrixXd& a_eq, const VectorXd& b_eq,
                            const MatrixXd& a_in, const VectorXd& b_in) {
  const int n = static_cast<int>(h.rows());
  const int me = static_cast<int>(a_eq.rows());
  const int mi = static_cast<int>(a_in.rows());
  OracleResult best;
  for (int mask = 0; mask < (1 << mi); ++mask) {
    std::vector<int> act;
    for (int i = 0; i < mi; ++i) {
      if (mask & (1 << i)) act.push_back(i);
    }
    const int q = me + static_cast<int>(act.size());
    MatrixXd kkt = MatrixXd::Zero(n + q, n + q);
    VectorXd rhs(n + q);
    kkt.topLeftCorner(n, n) = h;
    rhs.head(n) = -g;
    for (int e = 0; e < me; ++e) {
      kkt.block(n + e, 0, 1, n) = a_eq.row(e);
      kkt.block(0, n + e, n, 1) = a_eq.row(e).transpose();
      rhs[n + e] = b_eq[e];
    }
    for (std::size_t k = 0; k < act.size(); ++k) {
      const int row = n + me + static_cast<int>(k);
      kkt.block(row, 0, 1, n) = a_in.row(act[k]);
      kkt.block(0, row, n, 1) = a_in.row(act[k]).transpose();
      rhs[row] = b_in[act[k]];
    }
    Eigen::FullPivLU<MatrixXd> lu(kkt);
    if (!lu.isInvertible()) continue;
    const VectorXd sol = lu.solve(rhs);
    const VectorXd x = sol.head(n);
    bool ok = true;
    for (std::size_t k = 0; k < act.size() && ok; ++k) {
      // KKT as assembled gives mu = -lambda, so lambda >= 0 means mu <= 0.
      if (sol[n + me + k] > 1e-9) ok = false;
    }
    for (int i = 0; i < mi && ok; ++i) {
      if (a_in.row(i).dot(x) < b_in[i] - 1e-9) ok = false;
    }
    if (!ok) continue;
    const double obj = 0.5 * x.dot(h * x) + g.dot(x);
    if (obj < best.objective) {
      best.feasible = true;
      best.x = x;
      best.objective = obj;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("qp: unconstrained equals -H^-1 g") {
  MatrixXd h(2, 2);
  h << 2, 0.5, 0.5, 1;
  VectorXd g(2);
  g << 1, -2;
  const QpResult res = solve_qp(h, g, MatrixXd(0, 2), VectorXd(0),
                                MatrixXd(0, 2), VectorXd(0));
  REQUIRE(res.feasible);
  const VectorXd expect = -h.ldlt().solve(g);
  CHECK((res.x - expect).norm() < 1e-10);
}

TEST_CASE("qp: active box bound") {
  MatrixXd h = MatrixXd::Identity(3, 3);
  VectorXd g = VectorXd::Zero(3);
  MatrixXd a_in = MatrixXd::Identity(3, 3);
  VectorXd b_in = VectorXd::Ones(3);
  const QpResult res =
      solve_qp(h, g, MatrixXd(0, 3), VectorXd(0), a_in, b_in);
  REQUIRE(res.feasible);
  CHECK((res.x - VectorXd::Ones(3)).norm() < 1e-9);
}

TEST_CASE("qp: equality constraint") {
  MatrixXd h = MatrixXd::Identity(4, 4);
  VectorXd g = VectorXd::Zero(4);
  MatrixXd a_eq(1, 4);
  a_eq.setOnes();
  VectorXd b_eq(1);
  b_eq << 1.0;
  const QpResult res =
      solve_qp(h, g, a_eq, b_eq, MatrixXd(0, 4), VectorXd(0));
  REQUIRE(res.feasible);
  CHECK((res.x - VectorXd::Constant(4, 0.25)).norm() < 1e-9);
}

TEST_CASE("qp: infeasible constraints detected") {
  MatrixXd h = MatrixXd::Identity(1, 1);
  VectorXd g = VectorXd::Zero(1);
  MatrixXd a_in(2, 1);
  a_in << 1, -1;
  VectorXd b_in(2);
  b_in << 1.0, 0.5;  // x >= 1 and -x >= 0.5
  const QpResult res =
      solve_qp(h, g, MatrixXd(0, 1), VectorXd(0), a_in, b_in);
  CHECK_FALSE(res.feasible);
}

TEST_CASE("qp: random problems match the active-set enumeration oracle") {
  std::mt19937_64 rng(51);
  int solved = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + static_cast<int>(uniform(rng, 0, 2.99));
    MatrixXd a = MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) a(i, j) = uniform(rng, -1, 1);
    }
    MatrixXd h = a.transpose() * a + 0.3 * MatrixXd::Identity(n, n);
    VectorXd g(n);
    for (int i = 0; i < n; ++i) g[i] = uniform(rng, -2, 2);

    const int me = trial % 3 == 0 ? 1 : 0;
    MatrixXd a_eq = MatrixXd::Zero(me, n);
    VectorXd b_eq = VectorXd::Zero(me);
    for (int i = 0; i < me; ++i) {
      for (int j = 0; j < n; ++j) a_eq(i, j) = uniform(rng, -1, 1);
      b_eq[i] = uniform(rng, -1, 1);
    }
    const int mi = 2 + static_cast<int>(uniform(rng, 0, 3.99));
    MatrixXd a_in = MatrixXd::Zero(mi, n);
    VectorXd b_in = VectorXd::Zero(mi);
    for (int i = 0; i < mi; ++i) {
      for (int j = 0; j < n; ++j) a_in(i, j) = uniform(rng, -1, 1);
      b_in[i] = uniform(rng, -1.5, 0.5);
    }

    const OracleResult oracle = brute_force_qp(h, g, a_eq, b_eq, a_in, b_in);
    const QpResult res = solve_qp(h, g, a_eq, b_eq, a_in, b_in);
    if (!oracle.feasible) continue;  // oracle only certifies feasible cases
    ++solved;
    REQUIRE(res.feasible);
    CHECK(std::abs(res.objective - oracle.objective) <
          1e-7 * (1.0 + std::abs(oracle.objective)));
    CHECK((res.x - oracle.x).norm() < 1e-6 * (1.0 + oracle.x.norm()));
  }
  CHECK(solved >= 30);
}
