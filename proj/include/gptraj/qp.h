#pragma once

#include <Eigen/Dense>

namespace gptraj {

struct QpResult {
  bool feasible = false;
  Eigen::VectorXd x;
  double objective = 0.0;
  int iterations = 0;
};

/// Dense convex QP
///   min 1/2 x' H x + g' x
///   s.t. A_eq x = b_eq,  A_in x >= b_in
/// solved with the Goldfarb-Idnani dual active-set method. H must be positive
/// definite. Starts from the unconstrained optimum, so no feasible initial
/// point is needed; returns feasible = false when the constraints are
/// inconsistent.
QpResult solve_qp(const Eigen::MatrixXd& h, const Eigen::VectorXd& g,
                  const Eigen::MatrixXd& a_eq, const Eigen::VectorXd& b_eq,
                  const Eigen::MatrixXd& a_in, const Eigen::VectorXd& b_in);

}  // namespace gptraj
