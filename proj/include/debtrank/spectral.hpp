#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <string_view>

#include "debtrank/system.hpp"

namespace debtrank {

enum class StabilityClass {
  kStable,    // |lambda_max| < 1: shocks damp out
  kUnstable,  // |lambda_max| > 1: shocks amplify until defaults occur
  kCritical,  // within the tolerance band around 1
};

std::string_view to_string(StabilityClass c);

/// |lambda_max| within this band of 1 is classified CRITICAL rather than
/// forced into a binary class floating point cannot support.
inline constexpr double kCriticalBand = 1e-9;

struct StabilityReport {
  double spectral_radius = 0.0;
  StabilityClass classification = StabilityClass::kStable;
  /// Power-method iterations performed.
  std::size_t iterations = 0;
  /// Residual norm of the final eigenpair estimate (0 when the dense
  /// fallback produced the value).
  double residual = 0.0;
  /// True when the power method stalled or ran out of iterations and the
  /// full dense spectrum was used instead.
  bool used_dense_fallback = false;
  bool max_iter_exceeded = false;
};

/// Spectral radius of a nonnegative matrix by power iteration from the
/// all-ones vector. Nilpotent and periodic matrices defeat power iteration;
/// those fall back to the dense full-spectrum solver, so the report is
/// always definitive.
StabilityReport spectral_radius(const Eigen::MatrixXd& m, double tol = 1e-12,
                                std::size_t max_iter = 10000);

/// Asymptotic losses in the stable, unclipped regime:
/// solves (I - Lambda) h = h1. Throws SingularSystemError when I - Lambda is
/// numerically singular (spectral radius at 1).
Eigen::VectorXd linear_fixed_point(const Eigen::MatrixXd& lambda,
                                   const Eigen::VectorXd& h1);

/// Stability of the leverage matrix reduced by the surviving banks. As banks
/// default the spectral radius can only shrink, which is why an initially
/// unstable system still converges.
StabilityReport stability_after_defaults(const BankingSystem& system,
                                         std::span<const std::size_t> active,
                                         double tol = 1e-12,
                                         std::size_t max_iter = 10000);

}  // namespace debtrank
