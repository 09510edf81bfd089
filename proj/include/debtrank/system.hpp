#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "debtrank/errors.hpp"

namespace debtrank {

/// A bank counts as defaulted once its cumulative relative equity loss h
/// reaches 1; the comparison absorbs rounding at the clip boundary.
inline constexpr double kDefaultThreshold = 1.0 - 1e-12;

/// One bank's aggregate balance-sheet snapshot. Interbank totals are the
/// row/column margins of the (possibly unknown) exposure matrix.
struct BankRecord {
  std::string id;
  std::string name;
  double equity0 = 0.0;
  double external_assets = 0.0;
  double external_liabilities = 0.0;
  double interbank_assets_total = 0.0;
  double interbank_liabilities_total = 0.0;
  /// Empty means "derive as external_assets + interbank_assets_total".
  std::optional<double> total_assets;

  double total_assets_or_derived() const {
    return total_assets ? *total_assets
                        : external_assets + interbank_assets_total;
  }
};

/// Nonnegative matrix of interbank loans; entry (i, j) is the loan from
/// lender i to borrower j. The diagonal is zero.
class ExposureMatrix {
 public:
  /// Validates shape, sign, and zero diagonal.
  explicit ExposureMatrix(Eigen::MatrixXd values);

  static ExposureMatrix zero(std::size_t n) {
    return ExposureMatrix(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                                static_cast<Eigen::Index>(n)));
  }

  std::size_t size() const { return static_cast<std::size_t>(a_.rows()); }
  const Eigen::MatrixXd& values() const { return a_; }
  double operator()(std::size_t lender, std::size_t borrower) const {
    return a_(static_cast<Eigen::Index>(lender),
              static_cast<Eigen::Index>(borrower));
  }

 private:
  Eigen::MatrixXd a_;
};

/// The interbank leverage matrix Lambda (exposure over the lender's initial
/// equity) and its equity-space counterpart Lambda-tilde (exposure over the
/// borrower's initial equity).
struct LeverageMatrices {
  Eigen::MatrixXd lambda;
  Eigen::MatrixXd lambda_tilde;
};

/// Immutable snapshot of a banking system: records, exposures, and the
/// derived leverage matrices. Safe to share read-only across threads.
class BankingSystem {
 public:
  std::size_t size() const { return records_.size(); }
  const std::vector<BankRecord>& records() const { return records_; }
  const BankRecord& record(std::size_t i) const { return records_[i]; }
  const ExposureMatrix& exposures() const { return exposures_; }
  const LeverageMatrices& leverage() const { return leverage_; }
  const Eigen::VectorXd& equity0() const { return equity0_; }
  const Eigen::VectorXd& external_assets() const { return external_assets_; }
  double total_equity0() const { return equity0_.sum(); }
  std::optional<std::size_t> find_bank(std::string_view id) const;

 private:
  friend BankingSystem build_system(std::vector<BankRecord> records,
                                    ExposureMatrix exposures);
  BankingSystem(std::vector<BankRecord> records, ExposureMatrix exposures,
                LeverageMatrices leverage);

  std::vector<BankRecord> records_;
  ExposureMatrix exposures_;
  LeverageMatrices leverage_;
  Eigen::VectorXd equity0_;
  Eigen::VectorXd external_assets_;
};

/// Builds a system from validated records and exposures; computes both
/// leverage matrices. Rejects empty record lists, dimension mismatches,
/// duplicate ids, non-positive initial equity, and total-assets values
/// inconsistent with external + interbank assets (relative 1e-6).
BankingSystem build_system(std::vector<BankRecord> records,
                           ExposureMatrix exposures);

/// Indices of banks that have not defaulted: { j : h_j < 1 }.
std::vector<std::size_t> active_set(const Eigen::VectorXd& h);

/// Copy of m with rows and columns outside `active` zeroed.
Eigen::MatrixXd zero_inactive(const Eigen::MatrixXd& m,
                              std::span<const std::size_t> active);

/// The reduced leverage matrix Lambda(t): rows and columns of defaulted
/// banks set to zero. Defaulted columns stop propagating by construction;
/// defaulted rows are frozen because their equity no longer changes.
Eigen::MatrixXd reduce_leverage(const LeverageMatrices& leverage,
                                std::span<const std::size_t> active);

}  // namespace debtrank
