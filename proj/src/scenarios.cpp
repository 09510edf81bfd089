#include "debtrank/scenarios.hpp"

#include <algorithm>
#include <numeric>

#include "debtrank/parallel.hpp"

namespace debtrank {

namespace {

EnsembleStat stat_of(const std::vector<double>& values) {
  EnsembleStat stat;
  if (values.empty()) return stat;
  stat.min = *std::min_element(values.begin(), values.end());
  stat.max = *std::max_element(values.begin(), values.end());
  stat.mean = std::accumulate(values.begin(), values.end(), 0.0) /
              static_cast<double>(values.size());
  return stat;
}

}  // namespace

SystemLossSeries loss_series(const StressResult& result) {
  SystemLossSeries series;
  series.h_series = result.aggregate_series;
  series.direct_loss =
      series.h_series.size() > 1 ? series.h_series[1] : series.h_series.back();
  series.final_loss = series.h_series.back();
  series.amplification = series.direct_loss > 0.0
                             ? series.final_loss / series.direct_loss
                             : 1.0;
  return series;
}

UniformScenarioResult run_uniform_scenario(
    std::span<const BankingSystem> systems, double alpha,
    const RunConfig& config, unsigned threads) {
  UniformScenarioResult out;
  out.alpha = alpha;
  out.results.resize(systems.size());
  parallel_for(systems.size(), threads, [&](std::size_t k) {
    const auto& system = systems[k];
    out.results[k] = run_contagion(
        system, build_shock(ShockSpec::uniform(alpha), system), config);
  });

  std::vector<double> direct, final_loss, amplification;
  out.per_system.reserve(systems.size());
  for (const auto& result : out.results) {
    auto series = loss_series(result);
    direct.push_back(series.direct_loss);
    final_loss.push_back(series.final_loss);
    amplification.push_back(series.amplification);
    out.per_system.push_back(std::move(series));
  }
  out.direct_loss = stat_of(direct);
  out.final_loss = stat_of(final_loss);
  out.amplification = stat_of(amplification);
  return out;
}

ImpactVulnerability run_impact_vulnerability(
    std::span<const BankingSystem> systems, double alpha,
    const RunConfig& config, unsigned threads) {
  if (systems.empty()) {
    throw ValidationError("impact analysis needs at least one system");
  }
  const std::size_t n_banks = systems[0].size();
  for (const auto& s : systems) {
    if (s.size() != n_banks) {
      throw DimensionMismatchError(
          "ensemble systems must share the bank count");
    }
  }

  // one single-bank experiment per (system, shocked bank) pair
  const std::size_t n_runs = systems.size() * n_banks;
  std::vector<double> impact_run(n_runs);
  std::vector<Eigen::VectorXd> h_final_run(n_runs);
  parallel_for(n_runs, threads, [&](std::size_t run) {
    const std::size_t sys_idx = run / n_banks;
    const std::size_t bank = run % n_banks;
    const auto& system = systems[sys_idx];
    auto result = run_contagion(
        system, build_shock(ShockSpec::single(bank, alpha), system), config);
    impact_run[run] = result.aggregate_series.back();
    h_final_run[run] = std::move(result.h_final);
  });

  ImpactVulnerability out;
  out.impact.assign(n_banks, 0.0);
  out.vulnerability.assign(n_banks, 0.0);
  for (std::size_t run = 0; run < n_runs; ++run) {
    const std::size_t bank = run % n_banks;
    out.impact[bank] += impact_run[run];
    for (std::size_t i = 0; i < n_banks; ++i) {
      out.vulnerability[i] += h_final_run[run](static_cast<Eigen::Index>(i));
    }
  }
  const double runs_per_bank = static_cast<double>(systems.size());
  for (auto& v : out.impact) v /= runs_per_bank;
  for (auto& v : out.vulnerability) v /= static_cast<double>(n_runs);

  out.impact_reverse_rank = reverse_ranks(out.impact);
  out.vulnerability_reverse_rank = reverse_ranks(out.vulnerability);
  out.total_assets.reserve(n_banks);
  for (const auto& r : systems[0].records()) {
    out.total_assets.push_back(r.total_assets_or_derived());
  }
  return out;
}

std::vector<AlphaSweepRow> alpha_sweep(std::span<const BankingSystem> systems,
                                       std::span<const double> alphas,
                                       const RunConfig& config,
                                       unsigned threads) {
  std::vector<AlphaSweepRow> rows;
  rows.reserve(alphas.size());
  for (double alpha : alphas) {
    auto scenario = run_uniform_scenario(systems, alpha, config, threads);
    AlphaSweepRow row;
    row.alpha = alpha;
    row.direct_loss = scenario.direct_loss;
    row.final_loss = scenario.final_loss;
    row.amplification = scenario.amplification;
    rows.push_back(row);
  }
  return rows;
}

std::vector<std::size_t> reverse_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a,
                                                   std::size_t b) {
    return values[a] > values[b];
  });
  std::vector<std::size_t> ranks(n);
  for (std::size_t position = 0; position < n; ++position) {
    ranks[order[position]] = n - position;
  }
  return ranks;
}

}  // namespace debtrank
