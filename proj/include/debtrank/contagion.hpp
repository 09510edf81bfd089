#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <vector>

#include "debtrank/system.hpp"

namespace debtrank {

enum class ContagionMode {
  kGeneralized,
  kOriginalDebtRank,
};

struct RunConfig {
  /// Convergence threshold on the max-norm of the per-step loss increment.
  double tol = 1e-10;
  /// Iteration cap; empty means 10 * N + 1000.
  std::optional<std::size_t> max_steps;
  ContagionMode mode = ContagionMode::kGeneralized;

  std::size_t effective_max_steps(std::size_t n_banks) const {
    return max_steps ? *max_steps : 10 * n_banks + 1000;
  }
};

/// Dynamic state at time t: cumulative relative losses h(t), the previous
/// losses h(t-1), and the active set A(t-1) that reduces the leverage matrix.
struct ContagionState {
  std::size_t t = 0;
  Eigen::VectorXd h;
  Eigen::VectorXd h_prev;
  std::vector<std::size_t> active_prev;
};

struct DefaultEvent {
  std::size_t bank;
  std::size_t step;
};

struct StressResult {
  Eigen::VectorXd h_final;
  /// h(0), h(1), ..., h(T); componentwise non-decreasing.
  std::vector<Eigen::VectorXd> trajectory;
  /// Banks that reached h = 1, with the step at which they did.
  std::vector<DefaultEvent> defaults;
  std::size_t steps_to_convergence = 0;
  bool converged = false;
  /// System-level relative equity loss H(t) per step, equity-weighted.
  std::vector<double> aggregate_series;
};

/// Initial shock specification: a relative devaluation alpha of external
/// assets, applied to every bank, to a single bank, or given explicitly.
struct ShockSpec {
  enum class Kind { kUniform, kSingle, kCustom };

  static ShockSpec uniform(double alpha) {
    return {Kind::kUniform, alpha, 0, {}};
  }
  static ShockSpec single(std::size_t bank, double alpha) {
    return {Kind::kSingle, alpha, bank, {}};
  }
  static ShockSpec custom(Eigen::VectorXd h1) {
    return {Kind::kCustom, 0.0, 0, std::move(h1)};
  }

  Kind kind = Kind::kUniform;
  double alpha = 0.0;
  std::size_t bank = 0;
  Eigen::VectorXd vector;
};

/// Translates a shock spec into the t = 1 loss vector
/// h1_i = min(1, alpha * external_assets_i / equity0_i).
Eigen::VectorXd build_shock(const ShockSpec& spec, const BankingSystem& system);

ContagionState initial_state(const Eigen::VectorXd& h1);

/// One step of the generalized dynamics:
/// h_i(t+1) = min(1, h_i(t) + sum_j Lambda_ij(t) * [h_j(t) - h_j(t-1)]),
/// with Lambda(t) reduced by the active set A(t-1).
ContagionState step_generalized(const ContagionState& state,
                                const BankingSystem& system);

/// Iterates the dynamics selected by config.mode from shock h1 until the
/// increment drops below tol (or the mode's natural stop) or max_steps is
/// reached. Non-convergence is reported in the result, never thrown.
StressResult run_contagion(const BankingSystem& system,
                           const Eigen::VectorXd& h1,
                           const RunConfig& config = {});

/// The original DebtRank comparator: banks propagate a shock only once,
/// immediately after first receiving it, with weights W = min(1, Lambda).
StressResult run_original_debtrank(const BankingSystem& system,
                                   const Eigen::VectorXd& h1,
                                   const RunConfig& config = {});

/// Equity-space form of the same dynamics:
/// E_i(t+1) = max(0, E_i(t) + sum_j LambdaTilde_ij(t) * [E_j(t) - E_j(t-1)]).
/// Returns the per-step equity vectors E(0), E(1), ..., E(T). Serves as an
/// independent oracle for run_contagion via h = (E(0) - E(t)) / E(0).
std::vector<Eigen::VectorXd> simulate_equity(const BankingSystem& system,
                                             const Eigen::VectorXd& h1,
                                             const RunConfig& config = {});

}  // namespace debtrank
