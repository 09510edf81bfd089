#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "debtrank/contagion.hpp"
#include "debtrank/system.hpp"

namespace debtrank {

/// System-level loss series for one stress run. H(t) is the equity-weighted
/// aggregate of h(t): the fraction of total initial system equity destroyed.
struct SystemLossSeries {
  std::vector<double> h_series;
  double direct_loss = 0.0;  // H(1)
  double final_loss = 0.0;   // H at convergence
  /// final / direct; defined as 1 when the direct loss is zero.
  double amplification = 1.0;
};

SystemLossSeries loss_series(const StressResult& result);

struct EnsembleStat {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct UniformScenarioResult {
  double alpha = 0.0;
  std::vector<StressResult> results;
  std::vector<SystemLossSeries> per_system;
  EnsembleStat direct_loss;
  EnsembleStat final_loss;
  EnsembleStat amplification;
};

/// Devalues every bank's external assets by alpha on each reconstructed
/// system and aggregates direct vs contagion-inclusive losses.
UniformScenarioResult run_uniform_scenario(
    std::span<const BankingSystem> systems, double alpha,
    const RunConfig& config = {}, unsigned threads = 1);

/// Per-bank impact (system loss when only that bank is shocked) and
/// vulnerability (a bank's loss averaged over all single-bank experiments),
/// ensemble-averaged and converted to reverse ranks: rank N marks the most
/// impactful / most vulnerable bank, rank 1 the least, ties broken by bank
/// index.
struct ImpactVulnerability {
  std::vector<double> impact;
  std::vector<double> vulnerability;
  std::vector<std::size_t> impact_reverse_rank;
  std::vector<std::size_t> vulnerability_reverse_rank;
  std::vector<double> total_assets;
};

ImpactVulnerability run_impact_vulnerability(
    std::span<const BankingSystem> systems, double alpha,
    const RunConfig& config = {}, unsigned threads = 1);

struct AlphaSweepRow {
  double alpha = 0.0;
  EnsembleStat direct_loss;
  EnsembleStat final_loss;
  EnsembleStat amplification;
};

/// Uniform scenario repeated over a grid of shock sizes; rows are plot-ready
/// saturation curves.
std::vector<AlphaSweepRow> alpha_sweep(std::span<const BankingSystem> systems,
                                       std::span<const double> alphas,
                                       const RunConfig& config = {},
                                       unsigned threads = 1);

/// Descending-sort positions turned upside down: the largest value gets rank
/// n, so bigger rank means bigger value. Ties resolved by index order.
std::vector<std::size_t> reverse_ranks(std::span<const double> values);

}  // namespace debtrank
