#include "debtrank/contagion.hpp"

#include <algorithm>
#include <cmath>

#include "debtrank/errors.hpp"

namespace debtrank {

namespace {

double aggregate_loss(const Eigen::VectorXd& h, const BankingSystem& system) {
  return h.dot(system.equity0()) / system.total_equity0();
}

void record_new_defaults(const Eigen::VectorXd& before,
                         const Eigen::VectorXd& after, std::size_t step,
                         std::vector<DefaultEvent>& defaults) {
  for (Eigen::Index i = 0; i < after.size(); ++i) {
    if (after(i) >= kDefaultThreshold && before(i) < kDefaultThreshold) {
      defaults.push_back({static_cast<std::size_t>(i), step});
    }
  }
}

StressResult finish(const BankingSystem& system,
                    std::vector<Eigen::VectorXd> trajectory,
                    std::vector<DefaultEvent> defaults, bool converged) {
  StressResult result;
  result.h_final = trajectory.back();
  result.steps_to_convergence = trajectory.size() - 1;
  result.converged = converged;
  result.aggregate_series.reserve(trajectory.size());
  for (const auto& h : trajectory) {
    result.aggregate_series.push_back(aggregate_loss(h, system));
  }
  result.defaults = std::move(defaults);
  result.trajectory = std::move(trajectory);
  return result;
}

void check_shock_size(const Eigen::VectorXd& h1, const BankingSystem& system) {
  if (static_cast<std::size_t>(h1.size()) != system.size()) {
    throw DimensionMismatchError("shock vector has " +
                                 std::to_string(h1.size()) + " entries for " +
                                 std::to_string(system.size()) + " banks");
  }
}

}  // namespace

Eigen::VectorXd build_shock(const ShockSpec& spec,
                            const BankingSystem& system) {
  const auto n = static_cast<Eigen::Index>(system.size());
  switch (spec.kind) {
    case ShockSpec::Kind::kUniform:
    case ShockSpec::Kind::kSingle: {
      if (spec.alpha < 0.0 || std::isnan(spec.alpha)) {
        throw NegativeAlphaError("shock fraction must be nonnegative, got " +
                                 std::to_string(spec.alpha));
      }
      if (spec.alpha > 1.0) {
        throw ValidationError(
            "shock fraction cannot exceed 1 (full devaluation), got " +
            std::to_string(spec.alpha));
      }
      if (spec.kind == ShockSpec::Kind::kSingle && spec.bank >= system.size()) {
        throw UnknownBankError("no bank at index " +
                               std::to_string(spec.bank));
      }
      Eigen::VectorXd h1 = Eigen::VectorXd::Zero(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        if (spec.kind == ShockSpec::Kind::kSingle &&
            static_cast<std::size_t>(i) != spec.bank) {
          continue;
        }
        h1(i) = std::min(
            1.0, spec.alpha * system.external_assets()(i) /
                     system.equity0()(i));
      }
      return h1;
    }
    case ShockSpec::Kind::kCustom: {
      if (spec.vector.size() != n) {
        throw DimensionMismatchError(
            "custom shock has " + std::to_string(spec.vector.size()) +
            " entries for " + std::to_string(system.size()) + " banks");
      }
      Eigen::VectorXd h1 = spec.vector;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (h1(i) < 0.0 || std::isnan(h1(i))) {
          throw ValidationError("custom shock entries must be in [0, 1]");
        }
        h1(i) = std::min(1.0, h1(i));
      }
      return h1;
    }
  }
  throw ValidationError("unreachable shock kind");
}

ContagionState initial_state(const Eigen::VectorXd& h1) {
  ContagionState state;
  state.t = 1;
  state.h = h1.cwiseMin(1.0);
  state.h_prev = Eigen::VectorXd::Zero(h1.size());
  state.active_prev = active_set(state.h_prev);
  return state;
}

ContagionState step_generalized(const ContagionState& state,
                                const BankingSystem& system) {
  const Eigen::MatrixXd reduced =
      reduce_leverage(system.leverage(), state.active_prev);
  Eigen::VectorXd next =
      state.h + reduced * (state.h - state.h_prev);
  next = next.cwiseMin(1.0);

  ContagionState out;
  out.t = state.t + 1;
  out.h = std::move(next);
  out.h_prev = state.h;
  out.active_prev = active_set(state.h);
  return out;
}

StressResult run_contagion(const BankingSystem& system,
                           const Eigen::VectorXd& h1,
                           const RunConfig& config) {
  if (config.mode == ContagionMode::kOriginalDebtRank) {
    return run_original_debtrank(system, h1, config);
  }
  check_shock_size(h1, system);

  const std::size_t max_steps = config.effective_max_steps(system.size());
  std::vector<Eigen::VectorXd> trajectory;
  std::vector<DefaultEvent> defaults;
  trajectory.push_back(Eigen::VectorXd::Zero(h1.size()));

  ContagionState state = initial_state(h1);
  trajectory.push_back(state.h);
  record_new_defaults(trajectory[0], state.h, 1, defaults);

  bool converged =
      (state.h - state.h_prev).cwiseAbs().maxCoeff() < config.tol;
  while (!converged && state.t < max_steps) {
    ContagionState next = step_generalized(state, system);
    record_new_defaults(state.h, next.h, next.t, defaults);
    trajectory.push_back(next.h);
    converged = (next.h - state.h).cwiseAbs().maxCoeff() < config.tol;
    state = std::move(next);
  }
  return finish(system, std::move(trajectory), std::move(defaults), converged);
}

StressResult run_original_debtrank(const BankingSystem& system,
                                   const Eigen::VectorXd& h1,
                                   const RunConfig& config) {
  check_shock_size(h1, system);
  const auto n = static_cast<Eigen::Index>(system.size());
  const Eigen::MatrixXd weights =
      system.leverage().lambda.cwiseMin(1.0);

  const std::size_t max_steps = config.effective_max_steps(system.size());
  std::vector<Eigen::VectorXd> trajectory;
  std::vector<DefaultEvent> defaults;
  trajectory.push_back(Eigen::VectorXd::Zero(n));

  Eigen::VectorXd h = h1.cwiseMin(1.0);
  trajectory.push_back(h);
  record_new_defaults(trajectory[0], h, 1, defaults);

  // Banks propagate in the round right after they first become distressed.
  std::vector<std::size_t> fresh;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (h(j) > 0.0) fresh.push_back(static_cast<std::size_t>(j));
  }

  std::size_t t = 1;
  bool converged = fresh.empty();
  while (!fresh.empty() && t < max_steps) {
    Eigen::VectorXd next = h;
    for (Eigen::Index i = 0; i < n; ++i) {
      double received = 0.0;
      for (auto j : fresh) {
        received += weights(i, static_cast<Eigen::Index>(j)) *
                    h(static_cast<Eigen::Index>(j));
      }
      next(i) = std::min(1.0, next(i) + received);
    }
    ++t;
    record_new_defaults(h, next, t, defaults);
    fresh.clear();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (next(j) > 0.0 && h(j) == 0.0) {
        fresh.push_back(static_cast<std::size_t>(j));
      }
    }
    h = std::move(next);
    trajectory.push_back(h);
    converged = fresh.empty();
  }
  return finish(system, std::move(trajectory), std::move(defaults), converged);
}

std::vector<Eigen::VectorXd> simulate_equity(const BankingSystem& system,
                                             const Eigen::VectorXd& h1,
                                             const RunConfig& config) {
  check_shock_size(h1, system);
  const Eigen::VectorXd& e0 = system.equity0();

  std::vector<Eigen::VectorXd> series;
  series.push_back(e0);
  Eigen::VectorXd e_prev = e0;
  Eigen::VectorXd e = e0.cwiseProduct(Eigen::VectorXd::Ones(e0.size()) - h1);
  series.push_back(e);

  const std::size_t max_steps = config.effective_max_steps(system.size());
  // Active banks still hold positive equity; the threshold mirrors the
  // loss-space default band scaled to each bank's own size.
  const auto equity_active = [&](const Eigen::VectorXd& eq) {
    std::vector<std::size_t> active;
    for (Eigen::Index i = 0; i < eq.size(); ++i) {
      if (eq(i) > e0(i) * (1.0 - kDefaultThreshold)) {
        active.push_back(static_cast<std::size_t>(i));
      }
    }
    return active;
  };

  std::size_t t = 1;
  auto increment = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return ((a - b).cwiseQuotient(e0)).cwiseAbs().maxCoeff();
  };
  bool done = increment(e, e_prev) < config.tol;
  while (!done && t < max_steps) {
    const Eigen::MatrixXd reduced =
        zero_inactive(system.leverage().lambda_tilde, equity_active(e_prev));
    Eigen::VectorXd next = e + reduced * (e - e_prev);
    next = next.cwiseMax(0.0);
    ++t;
    e_prev = e;
    e = std::move(next);
    series.push_back(e);
    done = increment(e, e_prev) < config.tol;
  }
  return series;
}

}  // namespace debtrank
