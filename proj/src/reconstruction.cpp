#include "debtrank/reconstruction.hpp"

#include <cmath>
#include <limits>

#include "debtrank/parallel.hpp"
#include "debtrank/rng.hpp"

namespace debtrank {

namespace {

constexpr std::size_t kMaxRedraws = 100;
// Guards divisions when a margin row momentarily carries no weight.
constexpr double kRasEpsilon = 1e-30;

Eigen::VectorXd asset_margins(const std::vector<BankRecord>& records) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(records.size()));
  for (std::size_t i = 0; i < records.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = records[i].interbank_assets_total;
  }
  return v;
}

Eigen::VectorXd liability_margins(const std::vector<BankRecord>& records) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(records.size()));
  for (std::size_t i = 0; i < records.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = records[i].interbank_liabilities_total;
  }
  return v;
}

double expected_links(const FitnessVectors& fitness, double z) {
  return link_probabilities(fitness, z).sum();
}

// A sampled topology can carry the margins only if every positive margin
// has at least one link toward a positive counter-margin.
void check_support(const Eigen::MatrixXd& adjacency,
                   const Eigen::VectorXd& row_margins,
                   const Eigen::VectorXd& col_margins) {
  const auto n = adjacency.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (row_margins(i) <= 0.0) continue;
    double reachable = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (adjacency(i, j) > 0.0) reachable += col_margins(j);
    }
    if (reachable <= 0.0) {
      throw UnsupportedMarginError(static_cast<std::size_t>(i),
                                   UnsupportedMarginError::Direction::kAssets);
    }
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    if (col_margins(j) <= 0.0) continue;
    double reachable = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (adjacency(i, j) > 0.0) reachable += row_margins(i);
    }
    if (reachable <= 0.0) {
      throw UnsupportedMarginError(
          static_cast<std::size_t>(j),
          UnsupportedMarginError::Direction::kLiabilities);
    }
  }
}

}  // namespace

std::vector<BankRecord> rescale_liabilities(std::vector<BankRecord> records) {
  double assets = 0.0;
  double liabilities = 0.0;
  for (const auto& r : records) {
    assets += r.interbank_assets_total;
    liabilities += r.interbank_liabilities_total;
  }
  if (assets <= 0.0) {
    throw ZeroTotalError("total interbank assets are zero");
  }
  if (liabilities <= 0.0) {
    throw ZeroTotalError("total interbank liabilities are zero");
  }
  const double factor = assets / liabilities;
  for (auto& r : records) {
    r.interbank_liabilities_total *= factor;
  }
  return records;
}

FitnessVectors fitness_vectors(const std::vector<BankRecord>& records) {
  Eigen::VectorXd assets = asset_margins(records);
  Eigen::VectorXd liabilities = liability_margins(records);
  const double asset_total = assets.sum();
  const double liability_total = liabilities.sum();
  if (asset_total <= 0.0 || liability_total <= 0.0) {
    throw ZeroTotalError("fitness needs positive interbank totals");
  }
  return {assets / asset_total, liabilities / liability_total};
}

Eigen::MatrixXd link_probabilities(const FitnessVectors& fitness, double z) {
  if (z < 0.0 || std::isnan(z)) {
    throw NegativeZError("link density parameter must be nonnegative, got " +
                         std::to_string(z));
  }
  const auto n = fitness.x_out.size();
  if (fitness.x_in.size() != n) {
    throw DimensionMismatchError("fitness vectors differ in length");
  }
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double w = z * fitness.x_out(i) * fitness.x_in(j);
      p(i, j) = w / (1.0 + w);
    }
  }
  return p;
}

double calibrate_z(const FitnessVectors& fitness, double target_density,
                   std::pair<double, double> z_bracket) {
  if (target_density < 0.0 || target_density > 1.0) {
    throw ValidationError("target density must lie in [0, 1]");
  }
  const auto n = fitness.x_out.size();
  if (n < 2) {
    throw ValidationError("density calibration needs at least two banks");
  }
  const double target = target_density * static_cast<double>(n) *
                        static_cast<double>(n - 1);
  if (target == 0.0) return 0.0;

  // Even in the z -> infinity limit only pairs with a positive fitness
  // product can ever link.
  Eigen::Index positive_pairs = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && fitness.x_out(i) * fitness.x_in(j) > 0.0) {
        ++positive_pairs;
      }
    }
  }
  if (static_cast<double>(positive_pairs) <= target) {
    throw UnachievableDensityError(
        "target density needs " + std::to_string(target) +
        " expected links but at most " + std::to_string(positive_pairs) +
        " pairs can ever link");
  }

  double lo = std::max(0.0, z_bracket.first);
  double hi = std::max(lo, z_bracket.second);
  if (hi <= lo) hi = lo + 1.0;
  std::size_t expansions = 0;
  while (expected_links(fitness, hi) < target) {
    lo = hi;
    hi *= 2.0;
    if (++expansions > 100 || hi > 1e30) {
      throw UnachievableDensityError(
          "could not bracket the requested density below z = 1e30");
    }
  }

  // Bisection on a monotone map; exits on the relative width of the bracket.
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (expected_links(fitness, mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-10 * std::max(1.0, hi)) break;
  }
  return 0.5 * (lo + hi);
}

Eigen::MatrixXd sample_topology(const Eigen::MatrixXd& p,
                                std::mt19937_64& rng) {
  const auto n = p.rows();
  Eigen::MatrixXd adjacency = Eigen::MatrixXd::Zero(n, n);
  // Row-major traversal is part of the reproducibility contract.
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      if (uniform01(rng) < p(i, j)) adjacency(i, j) = 1.0;
    }
  }
  return adjacency;
}

ExposureMatrix ras_balance(const Eigen::MatrixXd& adjacency,
                           const Eigen::VectorXd& row_margins,
                           const Eigen::VectorXd& col_margins,
                           const ReconstructionConfig& config) {
  const auto n = adjacency.rows();
  if (adjacency.cols() != n || row_margins.size() != n ||
      col_margins.size() != n) {
    throw DimensionMismatchError("RAS inputs must share one dimension");
  }
  check_support(adjacency, row_margins, col_margins);

  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && adjacency(i, j) > 0.0) m(i, j) = 1.0;
    }
  }

  const double scale = std::max(row_margins.maxCoeff(),
                                std::max(col_margins.maxCoeff(), 1.0));
  double residual = std::numeric_limits<double>::infinity();
  for (std::size_t iter = 0; iter < config.ras_max_iter; ++iter) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double sum = m.row(i).sum();
      m.row(i) *= row_margins(i) / std::max(sum, kRasEpsilon);
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      const double sum = m.col(j).sum();
      m.col(j) *= col_margins(j) / std::max(sum, kRasEpsilon);
    }
    const double row_err =
        (m.rowwise().sum() - row_margins).cwiseAbs().maxCoeff();
    const double col_err =
        (m.colwise().sum().transpose() - col_margins).cwiseAbs().maxCoeff();
    residual = std::max(row_err, col_err);
    if (residual <= config.ras_tol * scale) {
      return ExposureMatrix(m);
    }
  }
  throw RasNotConvergedError(residual, config.ras_max_iter);
}

std::vector<BankingSystem> reconstruct_ensemble(
    const std::vector<BankRecord>& records, const ReconstructionConfig& config,
    unsigned threads) {
  auto rescaled = rescale_liabilities(records);
  const auto fitness = fitness_vectors(rescaled);
  const double z =
      calibrate_z(fitness, config.target_density, config.z_bracket);
  const Eigen::MatrixXd p = link_probabilities(fitness, z);
  const Eigen::VectorXd rows = asset_margins(rescaled);
  const Eigen::VectorXd cols = liability_margins(rescaled);

  std::vector<std::optional<BankingSystem>> slots(config.ensemble_size);
  parallel_for(config.ensemble_size, threads, [&](std::size_t k) {
    auto rng = make_substream(config.seed, k);
    for (std::size_t attempt = 0; attempt <= kMaxRedraws; ++attempt) {
      Eigen::MatrixXd adjacency = sample_topology(p, rng);
      try {
        ExposureMatrix exposures = ras_balance(adjacency, rows, cols, config);
        slots[k] = build_system(rescaled, std::move(exposures));
        return;
      } catch (const UnsupportedMarginError&) {
        continue;  // infeasible draw; try the next one from the same stream
      } catch (const RasNotConvergedError&) {
        // a topology can pass the local support check yet admit no balanced
        // matrix; such draws stall and are rejected like unsupported ones
        continue;
      }
    }
    throw ExhaustedRedrawsError(k);
  });

  std::vector<BankingSystem> ensemble;
  ensemble.reserve(config.ensemble_size);
  for (auto& slot : slots) {
    ensemble.push_back(std::move(*slot));
  }
  return ensemble;
}

}  // namespace debtrank
