#include "debtrank/system.hpp"

#include <cmath>
#include <unordered_map>
#include <unordered_set>
#include <utility>

namespace debtrank {

ExposureMatrix::ExposureMatrix(Eigen::MatrixXd values) : a_(std::move(values)) {
  if (a_.rows() != a_.cols()) {
    throw DimensionMismatchError("exposure matrix must be square, got " +
                                 std::to_string(a_.rows()) + "x" +
                                 std::to_string(a_.cols()));
  }
  for (Eigen::Index i = 0; i < a_.rows(); ++i) {
    for (Eigen::Index j = 0; j < a_.cols(); ++j) {
      const double v = a_(i, j);
      if (v < 0.0 || std::isnan(v)) {
        throw NegativeExposureError(static_cast<std::size_t>(i),
                                    static_cast<std::size_t>(j));
      }
    }
    if (a_(i, i) != 0.0) throw SelfLoopError(static_cast<std::size_t>(i));
  }
}

BankingSystem::BankingSystem(std::vector<BankRecord> records,
                             ExposureMatrix exposures,
                             LeverageMatrices leverage)
    : records_(std::move(records)),
      exposures_(std::move(exposures)),
      leverage_(std::move(leverage)) {
  const auto n = static_cast<Eigen::Index>(records_.size());
  equity0_.resize(n);
  external_assets_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    equity0_(i) = records_[static_cast<std::size_t>(i)].equity0;
    external_assets_(i) = records_[static_cast<std::size_t>(i)].external_assets;
  }
}

std::optional<std::size_t> BankingSystem::find_bank(std::string_view id) const {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (records_[i].id == id) return i;
  }
  return std::nullopt;
}

BankingSystem build_system(std::vector<BankRecord> records,
                           ExposureMatrix exposures) {
  if (records.empty()) {
    throw ValidationError("a banking system needs at least one bank");
  }
  if (records.size() != exposures.size()) {
    throw DimensionMismatchError(
        std::to_string(records.size()) + " records against a " +
        std::to_string(exposures.size()) + "-bank exposure matrix");
  }

  std::unordered_set<std::string> ids;
  for (const auto& r : records) {
    if (r.equity0 <= 0.0 || std::isnan(r.equity0)) {
      throw NonPositiveEquityError(r.id, r.equity0);
    }
    if (!ids.insert(r.id).second) {
      throw ValidationError("duplicate bank id '" + r.id + "'");
    }
    if (r.total_assets) {
      const double derived = r.external_assets + r.interbank_assets_total;
      const double scale = std::max(1.0, std::abs(derived));
      if (std::abs(*r.total_assets - derived) > 1e-6 * scale) {
        throw ValidationError("total assets for bank '" + r.id +
                              "' disagree with external + interbank assets");
      }
    }
  }

  const auto n = static_cast<Eigen::Index>(records.size());
  const Eigen::MatrixXd& a = exposures.values();
  LeverageMatrices leverage;
  leverage.lambda.resize(n, n);
  leverage.lambda_tilde.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      leverage.lambda(i, j) =
          a(i, j) / records[static_cast<std::size_t>(i)].equity0;
      leverage.lambda_tilde(i, j) =
          a(i, j) / records[static_cast<std::size_t>(j)].equity0;
    }
  }
  return BankingSystem(std::move(records), std::move(exposures),
                       std::move(leverage));
}

std::vector<std::size_t> active_set(const Eigen::VectorXd& h) {
  std::vector<std::size_t> active;
  active.reserve(static_cast<std::size_t>(h.size()));
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    if (h(i) < kDefaultThreshold) active.push_back(static_cast<std::size_t>(i));
  }
  return active;
}

Eigen::MatrixXd zero_inactive(const Eigen::MatrixXd& m,
                              std::span<const std::size_t> active) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m.rows(), m.cols());
  for (auto i : active) {
    const auto row = static_cast<Eigen::Index>(i);
    for (auto j : active) {
      const auto col = static_cast<Eigen::Index>(j);
      out(row, col) = m(row, col);
    }
  }
  return out;
}

Eigen::MatrixXd reduce_leverage(const LeverageMatrices& leverage,
                                std::span<const std::size_t> active) {
  return zero_inactive(leverage.lambda, active);
}

}  // namespace debtrank
