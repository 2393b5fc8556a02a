#include "gptraj/qp.h"

#include <cmath>
#include <limits>
#include <vector>

namespace gptraj {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Givens rotation utilities for the triangular factor updates.
double distance(double a, double b) {
  const double a1 = std::abs(a);
  const double b1 = std::abs(b);
  if (a1 > b1) {
    const double t = b1 / a1;
    return a1 * std::sqrt(1.0 + t * t);
  }
  if (b1 > a1) {
    const double t = a1 / b1;
    return b1 * std::sqrt(1.0 + t * t);
  }
  return a1 * std::sqrt(2.0);
}

}  // namespace

QpResult solve_qp(const Eigen::MatrixXd& h, const Eigen::VectorXd& g,
                  const Eigen::MatrixXd& a_eq, const Eigen::VectorXd& b_eq,
                  const Eigen::MatrixXd& a_in, const Eigen::VectorXd& b_in) {
  using Eigen::MatrixXd;
  using Eigen::VectorXd;

  const int n = static_cast<int>(h.rows());
  const int me = static_cast<int>(a_eq.rows());
  const int mi = static_cast<int>(a_in.rows());
  const int m = me + mi;

  QpResult result;
  result.x = VectorXd::Zero(n);

  // Cholesky of H and J0 = L^-T; the working matrix J tracks L^-T Q.
  Eigen::LLT<MatrixXd> llt(h);
  if (llt.info() != Eigen::Success) return result;

  MatrixXd j = MatrixXd::Identity(n, n);
  llt.matrixU().solveInPlace(j);  // J = U^-1 = L^-T
  const double c1 = h.trace();
  const double c2 = j.trace();

  // Unconstrained minimizer.
  VectorXd x = llt.solve(-g);

  MatrixXd r = MatrixXd::Zero(n, n);
  VectorXd u = VectorXd::Zero(m);
  std::vector<int> active;
  active.reserve(m);
  VectorXd d(n), z(n), rr(n), np(n);

  const double eps = 1e-12 * (1.0 + std::abs(c1) + std::abs(c2));
  int iter = 0;
  const int max_iter = 20 * (n + m) + 100;

  // Row of the stacked constraint matrix (equalities first).
  auto constraint_row = [&](int idx) -> VectorXd {
    if (idx < me) return a_eq.row(idx).transpose();
    return a_in.row(idx - me).transpose();
  };
  auto constraint_rhs = [&](int idx) -> double {
    return idx < me ? b_eq[idx] : b_in[idx - me];
  };

  // Installs the prepared constraint normal (d already = J' np) into R/J.
  auto add_constraint = [&]() -> bool {
    const int q = static_cast<int>(active.size());
    // Zero d[q+1..n) with Givens rotations applied to columns of J.
    for (int k = n - 1; k > q; --k) {
      double cc = d[k - 1];
      double ss = d[k];
      const double hyp = distance(cc, ss);
      if (hyp < 1e-300) continue;
      cc /= hyp;
      ss /= hyp;
      d[k - 1] = hyp;
      d[k] = 0.0;
      if (cc < 0.0) {
        d[k - 1] = -hyp;
        cc = -cc;
        ss = -ss;
      }
      const double nu = ss / (1.0 + cc);
      for (int i = 0; i < n; ++i) {
        const double t1 = j(i, k - 1);
        const double t2 = j(i, k);
        j(i, k - 1) = t1 * cc + t2 * ss;
        j(i, k) = nu * (t1 + j(i, k - 1)) - t2;
      }
    }
    if (std::abs(d[q]) <= eps) return false;  // dependent constraint
    r.col(q).head(q + 1) = d.head(q + 1);
    return true;
  };

  auto delete_constraint = [&](int pos) {
    // Remove column `pos` from R (and u / active), re-triangularize.
    const int q = static_cast<int>(active.size());
    for (int i = pos; i + 1 < q; ++i) {
      r.col(i).head(q) = r.col(i + 1).head(q);
      u[i] = u[i + 1];
      active[i] = active[i + 1];
    }
    u[q - 1] = 0.0;
    active.pop_back();
    const int qq = static_cast<int>(active.size());
    for (int k = pos; k < qq; ++k) {
      double cc = r(k, k);
      double ss = r(k + 1, k);
      const double hyp = distance(cc, ss);
      if (hyp < 1e-300) continue;
      cc /= hyp;
      ss /= hyp;
      r(k, k) = hyp;
      r(k + 1, k) = 0.0;
      if (cc < 0.0) {
        r(k, k) = -hyp;
        cc = -cc;
        ss = -ss;
      }
      const double nu = ss / (1.0 + cc);
      for (int col = k + 1; col < qq; ++col) {
        const double t1 = r(k, col);
        const double t2 = r(k + 1, col);
        r(k, col) = t1 * cc + t2 * ss;
        r(k + 1, col) = nu * (t1 + r(k, col)) - t2;
      }
      for (int i = 0; i < n; ++i) {
        const double t1 = j(i, k);
        const double t2 = j(i, k + 1);
        j(i, k) = t1 * cc + t2 * ss;
        j(i, k + 1) = nu * (t1 + j(i, k)) - t2;
      }
    }
  };

  auto compute_step = [&]() {
    const int q = static_cast<int>(active.size());
    d.noalias() = j.transpose() * np;
    z.setZero();
    for (int k = q; k < n; ++k) z += j.col(k) * d[k];
    // r = R^-1 d over the active prefix.
    for (int i = q - 1; i >= 0; --i) {
      double s = d[i];
      for (int k = i + 1; k < q; ++k) s -= r(i, k) * rr[k];
      rr[i] = s / r(i, i);
    }
  };

  // Phase 1: install equality constraints.
  for (int e = 0; e < me; ++e) {
    np = constraint_row(e);
    compute_step();
    double slack = np.dot(x) - constraint_rhs(e);
    const double z2 = z.squaredNorm();
    if (z2 > eps) {
      const double t2 = -slack / np.dot(z);
      x += t2 * z;
      const int q = static_cast<int>(active.size());
      for (int k = 0; k < q; ++k) u[k] -= t2 * rr[k];
      u[q] = t2;
    } else {
      // Direction does not exist: equality is dependent; accept only if it is
      // already satisfied.
      if (std::abs(slack) > 1e-8) return result;
      const int q = static_cast<int>(active.size());
      u[q] = 0.0;
    }
    if (!add_constraint()) {
      if (std::abs(np.dot(x) - constraint_rhs(e)) > 1e-8) return result;
      continue;  // consistent duplicate, skip
    }
    active.push_back(e);
  }

  // Phase 2: dual iterations over violated inequalities.
  while (iter++ < max_iter) {
    // Most violated inactive inequality.
    int chosen = -1;
    double worst = -1e-10 * (1.0 + b_in.size());
    for (int i = 0; i < mi; ++i) {
      const int idx = me + i;
      bool is_active = false;
      for (int a : active) {
        if (a == idx) {
          is_active = true;
          break;
        }
      }
      if (is_active) continue;
      const double slack = a_in.row(i).dot(x) - b_in[i];
      if (slack < worst) {
        worst = slack;
        chosen = idx;
      }
    }
    if (chosen < 0) {
      result.feasible = true;
      result.x = x;
      result.objective = 0.5 * x.dot(h * x) + g.dot(x);
      result.iterations = iter;
      return result;
    }

    np = constraint_row(chosen);
    double u_plus = 0.0;
    while (true) {
      if (iter++ >= max_iter) return result;
      compute_step();
      const int q = static_cast<int>(active.size());

      // Partial step length (dual blocking constraint).
      double t1 = kInf;
      int blocking = -1;
      for (int k = 0; k < q; ++k) {
        if (active[k] >= me && rr[k] > 0.0) {
          const double t = u[k] / rr[k];
          if (t < t1) {
            t1 = t;
            blocking = k;
          }
        }
      }
      const double z2 = z.squaredNorm();
      const double slack = np.dot(x) - constraint_rhs(chosen);
      double t2 = kInf;
      if (z2 > eps) t2 = -slack / np.dot(z);
      const double t = std::min(t1, t2);
      if (t >= kInf) return result;  // dual unbounded: infeasible

      if (t2 >= kInf) {
        // Dual-only step: adjust multipliers and drop the blocking constraint.
        for (int k = 0; k < q; ++k) u[k] -= t * rr[k];
        u_plus += t;
        delete_constraint(blocking);
        continue;
      }

      x += t * z;
      for (int k = 0; k < q; ++k) u[k] -= t * rr[k];
      u_plus += t;

      if (std::abs(t - t2) < 1e-14) {
        // Full step: the constraint becomes active.
        const int qq = static_cast<int>(active.size());
        u[qq] = u_plus;
        if (!add_constraint()) {
          // Numerically dependent; treat as satisfied.
          break;
        }
        active.push_back(chosen);
        break;
      }
      // Partial step: drop blocking constraint, keep working on `chosen`.
      delete_constraint(blocking);
    }
  }
  return result;
}

}  // namespace gptraj
