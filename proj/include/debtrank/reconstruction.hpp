#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "debtrank/system.hpp"

namespace debtrank {

struct ReconstructionConfig {
  /// Fraction of the N(N-1) possible directed links, in expectation.
  double target_density = 0.05;
  std::size_t ensemble_size = 100;
  /// Relative tolerance on both margin sets for RAS convergence.
  double ras_tol = 1e-8;
  std::size_t ras_max_iter = 10000;
  std::uint64_t seed = 0;
  /// Initial bisection bracket for z; the upper end expands as needed.
  std::pair<double, double> z_bracket = {0.0, 1.0};
};

/// Fitness values: each bank's share of total interbank assets (out) and
/// liabilities (in). Both vectors sum to one.
struct FitnessVectors {
  Eigen::VectorXd x_out;
  Eigen::VectorXd x_in;
};

/// Scales every interbank liability total by sum(A~) / sum(L~) so the two
/// aggregates match, as RAS requires. Throws ZeroTotalError when either
/// aggregate is zero.
std::vector<BankRecord> rescale_liabilities(std::vector<BankRecord> records);

FitnessVectors fitness_vectors(const std::vector<BankRecord>& records);

/// Directed link probabilities
/// p_ij = z * x_i_out * x_j_in / (1 + z * x_i_out * x_j_in), zero diagonal.
Eigen::MatrixXd link_probabilities(const FitnessVectors& fitness, double z);

/// Calibrates z so the expected number of links equals
/// target_density * N(N-1), by bisection on the monotone density map.
/// Throws UnachievableDensityError when too many fitness products vanish for
/// the target to be reachable.
double calibrate_z(const FitnessVectors& fitness, double target_density,
                   std::pair<double, double> z_bracket = {0.0, 1.0});

/// Draws each off-diagonal entry independently with probability p_ij.
/// Entries are visited in row-major order; with the substream rule this
/// makes samples reproducible.
Eigen::MatrixXd sample_topology(const Eigen::MatrixXd& p, std::mt19937_64& rng);

/// RAS / iterative proportional fitting on the sampled support: starting
/// from unit weights on the links, alternately scales rows to the asset
/// margins and columns to the liability margins until both match within
/// config.ras_tol. Throws UnsupportedMarginError for margins with no links
/// to carry them and RasNotConvergedError past config.ras_max_iter.
ExposureMatrix ras_balance(const Eigen::MatrixXd& adjacency,
                           const Eigen::VectorXd& row_margins,
                           const Eigen::VectorXd& col_margins,
                           const ReconstructionConfig& config);

/// The full two-step pipeline: rescale liabilities, calibrate z once, then
/// draw ensemble_size (topology; RAS) samples. Sample k uses the RNG
/// substream (seed, k); infeasible topologies are redrawn from the same
/// stream, at most 100 times per slot. The ensemble is identical for
/// identical inputs regardless of `threads`.
std::vector<BankingSystem> reconstruct_ensemble(
    const std::vector<BankRecord>& records, const ReconstructionConfig& config,
    unsigned threads = 1);

}  // namespace debtrank
