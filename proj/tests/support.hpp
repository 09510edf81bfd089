// Shared fixtures and generators for the test suite.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <random>
#include <string>
#include <vector>

#include "debtrank/rng.hpp"
#include "debtrank/system.hpp"

namespace dt = debtrank;

namespace testutil {

// Records with interbank totals consistent with the exposure matrix. External
// assets default to ten times equity so uniform shocks stay small.
inline std::vector<dt::BankRecord> make_records(
    const Eigen::VectorXd& equity, const Eigen::MatrixXd& exposures,
    double external_assets_factor = 10.0) {
  const auto n = static_cast<std::size_t>(equity.size());
  std::vector<dt::BankRecord> records(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = records[i];
    r.id = "B" + std::to_string(i);
    r.name = "Bank " + std::to_string(i);
    r.equity0 = equity(static_cast<Eigen::Index>(i));
    r.external_assets = external_assets_factor * r.equity0;
    r.external_liabilities = 0.5 * r.external_assets;
    r.interbank_assets_total = exposures.row(static_cast<Eigen::Index>(i)).sum();
    r.interbank_liabilities_total =
        exposures.col(static_cast<Eigen::Index>(i)).sum();
  }
  return records;
}

inline dt::BankingSystem make_system(const Eigen::VectorXd& equity,
                                     const Eigen::MatrixXd& exposures,
                                     double external_assets_factor = 10.0) {
  return dt::build_system(
      make_records(equity, exposures, external_assets_factor),
      dt::ExposureMatrix(exposures));
}

// Two banks, E = (10, 20), external assets (100, 50), cross exposures
// A(0,1) = 5 and A(1,0) = 4. Interbank leverage matrix [[0, 0.5], [0.2, 0]].
inline dt::BankingSystem two_bank_fixture() {
  Eigen::VectorXd equity(2);
  equity << 10.0, 20.0;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2);
  a(0, 1) = 5.0;
  a(1, 0) = 4.0;
  std::vector<dt::BankRecord> records(2);
  records[0] = {"B0", "Bank 0", 10.0, 100.0, 60.0, 5.0, 4.0, std::nullopt};
  records[1] = {"B1", "Bank 1", 20.0, 50.0, 30.0, 4.0, 5.0, std::nullopt};
  return dt::build_system(std::move(records), dt::ExposureMatrix(a));
}

// Dense off-diagonal matrix of strictly positive entries, rescaled so the
// spectral radius of the leverage matrix equals `rho`.
inline Eigen::MatrixXd random_dense_nonneg(std::mt19937_64& rng, int n) {
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      m(i, j) = (i == j) ? 0.0 : 0.05 + dt::uniform01(rng);
  return m;
}

inline double dense_spectral_radius(const Eigen::MatrixXd& m) {
  return m.eigenvalues().cwiseAbs().maxCoeff();
}

// Random system whose leverage matrix has spectral radius exactly `rho`
// (up to the dense eigensolver's accuracy). Dense positivity keeps the
// matrix primitive, so contagion from positive shocks cannot stall early.
inline dt::BankingSystem random_system_with_radius(std::mt19937_64& rng, int n,
                                                   double rho) {
  Eigen::VectorXd equity(n);
  for (int i = 0; i < n; ++i) equity(i) = 1.0 + 9.0 * dt::uniform01(rng);
  Eigen::MatrixXd lambda = random_dense_nonneg(rng, n);
  lambda *= rho / dense_spectral_radius(lambda);
  Eigen::MatrixXd exposures = equity.asDiagonal() * lambda;
  return make_system(equity, exposures);
}

// Sparse nonnegative system; about `density` of off-diagonal slots filled.
inline dt::BankingSystem random_sparse_system(std::mt19937_64& rng, int n,
                                              double density,
                                              double max_leverage = 0.9) {
  Eigen::VectorXd equity(n);
  for (int i = 0; i < n; ++i) equity(i) = 1.0 + 9.0 * dt::uniform01(rng);
  Eigen::MatrixXd exposures = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && dt::uniform01(rng) < density)
        exposures(i, j) = equity(i) * max_leverage * dt::uniform01(rng);
  return make_system(equity, exposures);
}

// Directed tree: every non-root bank lends to its parent only, so the
// leverage matrix is nilpotent and every entry is at most `max_leverage`.
// With max_leverage <= 1 the clipped and unclipped propagation weights agree.
inline dt::BankingSystem random_tree_system(std::mt19937_64& rng, int n,
                                            double max_leverage = 1.0) {
  Eigen::VectorXd equity(n);
  for (int i = 0; i < n; ++i) equity(i) = 1.0 + 9.0 * dt::uniform01(rng);
  Eigen::MatrixXd exposures = Eigen::MatrixXd::Zero(n, n);
  for (int child = 1; child < n; ++child) {
    const int parent =
        static_cast<int>(dt::uniform01(rng) * child) % child;
    // child lends to parent: a loss at the parent propagates to the child.
    exposures(child, parent) =
        equity(child) * max_leverage * (0.1 + 0.9 * dt::uniform01(rng));
  }
  return make_system(equity, exposures);
}

inline Eigen::VectorXd random_shock(std::mt19937_64& rng, int n,
                                    double max_size = 0.2) {
  Eigen::VectorXd h(n);
  for (int i = 0; i < n; ++i)
    h(i) = max_size * (0.05 + 0.95 * dt::uniform01(rng));
  return h;
}

inline std::string data_path(const std::string& name) {
  return std::string(DEBTRANK_TEST_DATA_DIR) + "/" + name;
}

}  // namespace testutil
