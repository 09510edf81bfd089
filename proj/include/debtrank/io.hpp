#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <span>
#include <string>
#include <vector>

#include "debtrank/contagion.hpp"
#include "debtrank/scenarios.hpp"
#include "debtrank/spectral.hpp"
#include "debtrank/system.hpp"

namespace debtrank {

/// Balance-sheet CSV with header
/// bank_id,name,equity,external_assets,external_liabilities,
/// interbank_assets,interbank_liabilities,total_assets
/// An empty total_assets field means "derive".
std::vector<BankRecord> load_balance_csv(const std::filesystem::path& path);

/// Edge-list CSV `lender_id,borrower_id,exposure` with strictly positive
/// exposures; absent pairs are zero. Ids must resolve against `records`.
ExposureMatrix load_exposures_csv(const std::filesystem::path& path,
                                  const std::vector<BankRecord>& records);

/// Writes the positive entries of an exposure matrix as an edge list in
/// row-major order, full round-trip precision.
void write_exposures_csv(const std::filesystem::path& path,
                         const ExposureMatrix& exposures,
                         const std::vector<BankRecord>& records);

void write_rankings_csv(const std::filesystem::path& path,
                        const ImpactVulnerability& ranking,
                        const std::vector<BankRecord>& records);

/// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double value);

/// FNV-1a 64-bit digest of a file's bytes, as 16 hex characters.
std::string file_digest(const std::filesystem::path& path);

nlohmann::json stress_result_to_json(const StressResult& result,
                                     const std::vector<BankRecord>& records,
                                     bool include_trajectory = false);

nlohmann::json stability_report_to_json(const StabilityReport& report);

nlohmann::json scatter_payload_json(const ImpactVulnerability& ranking,
                                    const std::vector<BankRecord>& records);

nlohmann::json ensemble_stat_json(const EnsembleStat& stat);

/// Everything needed to reproduce a run bit-for-bit given the same inputs.
struct RunManifest {
  std::string tool_version;
  std::string command;
  /// (role, path, digest) triplets for every input file.
  std::vector<std::array<std::string, 3>> inputs;
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::string timestamp;
};

nlohmann::json manifest_to_json(const RunManifest& manifest);

/// Current UTC time as ISO 8601 (seconds resolution).
std::string utc_timestamp();

void write_json_file(const std::filesystem::path& path,
                     const nlohmann::json& value);

void write_text_file(const std::filesystem::path& path,
                     const std::string& text);

}  // namespace debtrank
