#include "markovld/convex_solver.hpp"

#include <cmath>
#include <limits>

#include "markovld/errors.hpp"

namespace markovld {

bool reduce_constraints(Eigen::MatrixXd& A, Eigen::VectorXd& b, double tol) {
  if (A.rows() == 0) return true;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A.transpose());
  qr.setThreshold(tol);
  const Eigen::Index r = qr.rank();
  Eigen::MatrixXd Ar(r, A.cols());
  Eigen::VectorXd br(r);
  const auto& perm = qr.colsPermutation().indices();
  for (Eigen::Index i = 0; i < r; ++i) {
    Ar.row(i) = A.row(perm(i));
    br(i) = b(perm(i));
  }
  if (r > 0) {
    Eigen::VectorXd x = Ar.transpose() * (Ar * Ar.transpose()).ldlt().solve(br);
    double scale = 1.0 + b.cwiseAbs().maxCoeff() + A.cwiseAbs().maxCoeff() * x.cwiseAbs().maxCoeff();
    if ((A * x - b).cwiseAbs().maxCoeff() > tol * scale) return false;
  } else if (b.cwiseAbs().maxCoeff() > tol * (1.0 + A.cwiseAbs().maxCoeff())) {
    return false;
  }
  A = std::move(Ar);
  b = std::move(br);
  return true;
}

namespace {

struct Newton {
  Eigen::VectorXd dx;
  Eigen::VectorXd nu;  // multiplier estimate for t f - sum log x
  double decrement2 = 0.0;
};

}  // namespace

SolverResult solve_convex(const ConvexProblem& p, Eigen::VectorXd x, const SolverOptions& opt) {
  const Eigen::Index n = static_cast<Eigen::Index>(p.dim);
  if (x.size() != n || static_cast<Eigen::Index>(p.positive.size()) != n) {
    throw Error(ErrorCode::InvalidArgument, "solver dimensions do not match");
  }
  Eigen::MatrixXd A = p.A;
  Eigen::VectorXd b = p.b;
  if (!reduce_constraints(A, b)) throw Error(ErrorCode::InfeasibleLevel, "linear constraints are inconsistent");
  const Eigen::Index m = A.rows();
  double barrier_terms = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (p.positive[i]) {
      barrier_terms += 1.0;
      if (!(x(i) > 0.0)) throw Error(ErrorCode::InvalidArgument, "initial point must be strictly positive");
    }
  }
  const double b_scale = 1.0 + (m > 0 ? b.cwiseAbs().maxCoeff() : 0.0);

  Eigen::VectorXd grad(n), d(n);
  Eigen::MatrixXd hess(n, n), kkt(n + m, n + m);
  Eigen::VectorXd rhs(n + m);

  auto in_domain = [&](const Eigen::VectorXd& y) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (p.positive[i] && !(y(i) > 0.0)) return false;
    }
    return std::isfinite(p.value(y));
  };
  auto barrier_value = [&](const Eigen::VectorXd& y, double t) {
    double v = t * p.value(y);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (p.positive[i]) v -= std::log(y(i));
    }
    return v;
  };

  // Newton step in the variables y = x / d, d_i = x_i on barrier coordinates.
  // The primal block is divided by t so that the Schur complement stays O(1).
  auto newton = [&](double t) {
    p.derivatives(x, grad, hess);
    for (Eigen::Index i = 0; i < n; ++i) d(i) = p.positive[i] ? x(i) : 1.0;
    kkt.setZero();
    kkt.topLeftCorner(n, n) = d.asDiagonal() * hess * d.asDiagonal();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (p.positive[i]) kkt(i, i) += 1.0 / t;
    }
    Eigen::MatrixXd AD = A * d.asDiagonal();
    kkt.topRightCorner(n, m) = AD.transpose();
    kkt.bottomLeftCorner(m, n) = AD;
    rhs.head(n) = -d.cwiseProduct(grad);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (p.positive[i]) rhs(i) += 1.0 / t;
    }
    rhs.tail(m) = -(A * x - b);
    Eigen::VectorXd sol = kkt.partialPivLu().solve(rhs);
    Newton out;
    Eigen::VectorXd dy = sol.head(n);
    out.dx = d.cwiseProduct(dy);
    out.nu = t * sol.tail(m);
    out.decrement2 = t * dy.dot(kkt.topLeftCorner(n, n) * dy);
    return out;
  };
  auto scaled_residual = [&](double t, const Eigen::VectorXd& nu) {
    p.derivatives(x, grad, hess);
    Eigen::VectorXd r = t * grad + A.transpose() * nu;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (p.positive[i]) r(i) = r(i) * x(i) - 1.0;
    }
    return r.norm();
  };
  auto max_step = [&](const Eigen::VectorXd& dx) {
    double s = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (p.positive[i] && dx(i) < 0.0) s = std::min(s, -0.99 * x(i) / dx(i));
    }
    return s;
  };

  SolverResult res;
  double t = opt.t0;
  Eigen::VectorXd nu = Eigen::VectorXd::Zero(m);
  bool feasible = m == 0 || (A * x - b).cwiseAbs().maxCoeff() <= 1e-13 * b_scale;
  for (;;) {
    bool centered = false;
    for (std::size_t inner = 0; inner < 200 && res.iterations < opt.max_newton; ++inner) {
      ++res.iterations;
      Newton step = newton(t);
      nu = step.nu;
      if (!step.dx.allFinite()) break;
      double s = max_step(step.dx);
      if (!feasible) {
        // Backtrack until the point is in the domain; a full step restores A x = b.
        while (s > 1e-20 && !in_domain(x + s * step.dx)) s *= 0.5;
        x += s * step.dx;
        feasible = s == 1.0 || (A * x - b).cwiseAbs().maxCoeff() <= 1e-13 * b_scale;
        continue;
      }
      if (step.decrement2 <= 2.0 * opt.centering_tol) {
        centered = true;
        break;
      }
      if (step.decrement2 < 0.0625 && s == 1.0 && in_domain(x + step.dx)) {
        x += step.dx;
        continue;
      }
      double phi0 = barrier_value(x, t);
      while (s > 1e-20) {
        Eigen::VectorXd y = x + s * step.dx;
        if (in_domain(y) && barrier_value(y, t) <= phi0 - 0.25 * s * step.decrement2) break;
        s *= 0.5;
      }
      if (s <= 1e-20) {
        // No measurable progress: the iterate is centered to working precision.
        centered = true;
        break;
      }
      x += s * step.dx;
    }
    res.stationarity = scaled_residual(t, nu) / t;
    if (!centered || barrier_terms / t < opt.gap_tol || res.iterations >= opt.max_newton) {
      res.converged = centered && barrier_terms / t < opt.gap_tol;
      break;
    }
    t *= opt.t_factor;
  }
  res.x = x;
  return res;
}

}  // namespace markovld
