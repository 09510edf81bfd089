#include "debtrank/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

#include "debtrank/errors.hpp"

namespace debtrank {

namespace {

StabilityClass classify(double radius) {
  if (std::abs(radius - 1.0) <= kCriticalBand) return StabilityClass::kCritical;
  return radius < 1.0 ? StabilityClass::kStable : StabilityClass::kUnstable;
}

double dense_radius(const Eigen::MatrixXd& m) {
  return m.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

std::string_view to_string(StabilityClass c) {
  switch (c) {
    case StabilityClass::kStable:
      return "STABLE";
    case StabilityClass::kUnstable:
      return "UNSTABLE";
    case StabilityClass::kCritical:
      return "CRITICAL";
  }
  return "UNKNOWN";
}

StabilityReport spectral_radius(const Eigen::MatrixXd& m, double tol,
                                std::size_t max_iter) {
  StabilityReport report;
  if (m.rows() != m.cols()) {
    throw DimensionMismatchError("spectral radius needs a square matrix");
  }
  if (m.rows() == 0 || m.isZero(0.0)) {
    report.classification = classify(0.0);
    return report;
  }

  // Power iteration from the all-ones vector. For a nonnegative matrix the
  // iterates stay nonnegative, so the Rayleigh quotient tracks the Perron
  // root whenever one dominates.
  const auto n = m.rows();
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n) / std::sqrt(double(n));
  double estimate = 0.0;
  double best_residual = std::numeric_limits<double>::infinity();
  std::size_t stalled = 0;
  bool converged = false;

  for (std::size_t k = 0; k < max_iter; ++k) {
    Eigen::VectorXd y = m * x;
    const double norm = y.norm();
    if (norm == 0.0) {
      // The cone collapsed to zero: every eigenvalue on the nonnegative
      // invariant subspace is 0, which for a nonnegative matrix pins the
      // spectral radius itself.
      report.iterations = k + 1;
      report.spectral_radius = 0.0;
      report.residual = 0.0;
      report.classification = classify(0.0);
      return report;
    }
    estimate = x.dot(y);  // Rayleigh quotient, |x| = 1
    const double residual = (y - estimate * x).norm();
    report.iterations = k + 1;
    if (residual <= tol * std::max(1.0, std::abs(estimate))) {
      report.residual = residual;
      converged = true;
      break;
    }
    // Track progress; periodic matrices oscillate without improving.
    if (residual < best_residual * 0.999) {
      best_residual = residual;
      stalled = 0;
    } else if (++stalled >= 50) {
      break;
    }
    x = y / norm;
  }

  if (converged) {
    report.spectral_radius = std::abs(estimate);
    report.classification = classify(report.spectral_radius);
    return report;
  }

  report.max_iter_exceeded = report.iterations >= max_iter;
  report.used_dense_fallback = true;
  report.spectral_radius = dense_radius(m);
  report.residual = 0.0;
  report.classification = classify(report.spectral_radius);
  return report;
}

Eigen::VectorXd linear_fixed_point(const Eigen::MatrixXd& lambda,
                                   const Eigen::VectorXd& h1) {
  if (lambda.rows() != lambda.cols() || lambda.rows() != h1.size()) {
    throw DimensionMismatchError("fixed point needs matching dimensions");
  }
  const Eigen::MatrixXd system =
      Eigen::MatrixXd::Identity(lambda.rows(), lambda.cols()) - lambda;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
  if (!lu.isInvertible()) {
    throw SingularSystemError(
        "I - Lambda is singular; the linear dynamics have no fixed point");
  }
  return lu.solve(h1);
}

StabilityReport stability_after_defaults(const BankingSystem& system,
                                         std::span<const std::size_t> active,
                                         double tol, std::size_t max_iter) {
  return spectral_radius(reduce_leverage(system.leverage(), active), tol,
                         max_iter);
}

}  // namespace debtrank
