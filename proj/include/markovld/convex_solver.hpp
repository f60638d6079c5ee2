#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <vector>

namespace markovld {

/// minimize f(x) subject to A x = b and x_i > 0 for i in `positive`.
///
/// f must be convex, finite and twice differentiable wherever the positive
/// coordinates are > 0.
struct ConvexProblem {
  std::size_t dim = 0;
  std::vector<bool> positive;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  std::function<double(const Eigen::VectorXd&)> value;
  /// Writes the gradient and the (dense) Hessian.
  std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&, Eigen::MatrixXd&)> derivatives;
};

struct SolverOptions {
  double gap_tol = 1e-12;        ///< stop when (#barrier terms)/t falls below this
  double centering_tol = 1e-10;  ///< scaled KKT residual for each centering step
  double t0 = 1.0;
  double t_factor = 8.0;
  std::size_t max_newton = 2000;
};

struct SolverResult {
  Eigen::VectorXd x;
  std::size_t iterations = 0;
  double stationarity = 0.0;
  bool converged = false;
};

/// Drops linearly dependent rows of [A | b]. Returns false when the system is
/// inconsistent.
bool reduce_constraints(Eigen::MatrixXd& A, Eigen::VectorXd& b, double tol = 1e-10);

/// Log-barrier interior point method with infeasible-start Newton centering.
/// `x0` must satisfy the positivity constraints strictly but need not satisfy
/// A x = b. Throws InfeasibleLevel if A x = b is inconsistent.
SolverResult solve_convex(const ConvexProblem& problem, Eigen::VectorXd x0, const SolverOptions& options = {});

}  // namespace markovld
