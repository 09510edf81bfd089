#include "debtrank/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "debtrank/errors.hpp"

namespace debtrank {

namespace {

const char* kBalanceHeader =
    "bank_id,name,equity,external_assets,external_liabilities,"
    "interbank_assets,interbank_liabilities,total_assets";
const char* kExposuresHeader = "lender_id,borrower_id,exposure";
const char* kRankingsHeader =
    "bank_id,name,total_assets,impact,vulnerability,impact_rank,"
    "vulnerability_rank";

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(current);
      current.clear();
    } else if (c != '\r') {
      current.push_back(c);
    }
  }
  fields.push_back(current);
  return fields;
}

double parse_number(const std::string& field, std::size_t line,
                    std::size_t column) {
  const char* begin = field.c_str();
  char* end = nullptr;
  const double value = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw ParseError(line, column, "expected a number, got '" + field + "'");
  }
  return value;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open '" + path.string() + "' for reading");
  }
  return in;
}

std::string strip_cr(std::string line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) {
    line.pop_back();
  }
  return line;
}

}  // namespace

std::vector<BankRecord> load_balance_csv(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != kBalanceHeader) {
    throw ParseError(1, 1, std::string("expected header '") + kBalanceHeader +
                               "'");
  }

  std::vector<BankRecord> records;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (strip_cr(line).empty()) continue;
    auto fields = split_fields(strip_cr(line));
    if (fields.size() != 8) {
      throw ParseError(line_no, 1,
                       "expected 8 fields, got " +
                           std::to_string(fields.size()));
    }
    BankRecord r;
    r.id = fields[0];
    r.name = fields[1];
    if (r.id.empty()) throw ParseError(line_no, 1, "empty bank id");
    if (!seen.insert(r.id).second) {
      throw ParseError(line_no, 1, "duplicate bank id '" + r.id + "'");
    }
    r.equity0 = parse_number(fields[2], line_no, 3);
    r.external_assets = parse_number(fields[3], line_no, 4);
    r.external_liabilities = parse_number(fields[4], line_no, 5);
    r.interbank_assets_total = parse_number(fields[5], line_no, 6);
    r.interbank_liabilities_total = parse_number(fields[6], line_no, 7);
    if (!fields[7].empty()) {
      r.total_assets = parse_number(fields[7], line_no, 8);
    }
    if (r.equity0 <= 0.0) {
      throw NonPositiveEquityError(r.id, r.equity0);
    }
    records.push_back(std::move(r));
  }
  if (records.empty()) {
    throw ParseError(line_no, 1, "no bank rows in '" + path.string() + "'");
  }
  return records;
}

ExposureMatrix load_exposures_csv(const std::filesystem::path& path,
                                  const std::vector<BankRecord>& records) {
  auto in = open_or_throw(path);
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != kExposuresHeader) {
    throw ParseError(1, 1, std::string("expected header '") +
                               kExposuresHeader + "'");
  }

  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < records.size(); ++i) {
    index.emplace(records[i].id, i);
  }

  const auto n = static_cast<Eigen::Index>(records.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd filled = Eigen::MatrixXd::Zero(n, n);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (strip_cr(line).empty()) continue;
    auto fields = split_fields(strip_cr(line));
    if (fields.size() != 3) {
      throw ParseError(line_no, 1,
                       "expected 3 fields, got " +
                           std::to_string(fields.size()));
    }
    const auto lender = index.find(fields[0]);
    if (lender == index.end()) {
      throw ParseError(line_no, 1, "unknown lender id '" + fields[0] + "'");
    }
    const auto borrower = index.find(fields[1]);
    if (borrower == index.end()) {
      throw ParseError(line_no, 2, "unknown borrower id '" + fields[1] + "'");
    }
    if (lender->second == borrower->second) {
      throw ParseError(line_no, 2,
                       "self-exposure for bank '" + fields[0] + "'");
    }
    const double value = parse_number(fields[2], line_no, 3);
    if (!(value > 0.0)) {
      throw ParseError(line_no, 3, "exposures must be strictly positive");
    }
    const auto i = static_cast<Eigen::Index>(lender->second);
    const auto j = static_cast<Eigen::Index>(borrower->second);
    if (filled(i, j) != 0.0) {
      throw ParseError(line_no, 1,
                       "duplicate edge " + fields[0] + " -> " + fields[1]);
    }
    filled(i, j) = 1.0;
    a(i, j) = value;
  }
  return ExposureMatrix(std::move(a));
}

void write_exposures_csv(const std::filesystem::path& path,
                         const ExposureMatrix& exposures,
                         const std::vector<BankRecord>& records) {
  std::ostringstream out;
  out << kExposuresHeader << "\n";
  const auto n = static_cast<Eigen::Index>(exposures.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double value = exposures.values()(i, j);
      if (value > 0.0) {
        out << records[static_cast<std::size_t>(i)].id << ','
            << records[static_cast<std::size_t>(j)].id << ','
            << format_double(value) << "\n";
      }
    }
  }
  write_text_file(path, out.str());
}

void write_rankings_csv(const std::filesystem::path& path,
                        const ImpactVulnerability& ranking,
                        const std::vector<BankRecord>& records) {
  std::ostringstream out;
  out << kRankingsHeader << "\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    out << records[i].id << ',' << records[i].name << ','
        << format_double(records[i].total_assets_or_derived()) << ','
        << format_double(ranking.impact[i]) << ','
        << format_double(ranking.vulnerability[i]) << ','
        << ranking.impact_reverse_rank[i] << ','
        << ranking.vulnerability_reverse_rank[i] << "\n";
  }
  write_text_file(path, out.str());
}

std::string format_double(double value) {
  char buffer[64];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buffer, sizeof(buffer), "%.*g", precision, value);
    if (std::strtod(buffer, nullptr) == value) break;
  }
  return buffer;
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path.string() + "' for digesting");
  }
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  char chunk[4096];
  while (in.read(chunk, sizeof(chunk)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(chunk[i]);
      hash *= 0x100000001b3ULL;
    }
  }
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016" PRIx64, hash);
  return buffer;
}

nlohmann::json stress_result_to_json(const StressResult& result,
                                     const std::vector<BankRecord>& records,
                                     bool include_trajectory) {
  nlohmann::json j;
  j["h_final"] = std::vector<double>(
      result.h_final.data(), result.h_final.data() + result.h_final.size());
  j["H_series"] = result.aggregate_series;
  j["steps"] = result.steps_to_convergence;
  j["converged"] = result.converged;
  auto defaults = nlohmann::json::array();
  for (const auto& event : result.defaults) {
    defaults.push_back({{"bank_id", records[event.bank].id},
                        {"bank_index", event.bank},
                        {"step", event.step}});
  }
  j["defaults"] = std::move(defaults);
  if (include_trajectory) {
    auto trajectory = nlohmann::json::array();
    for (const auto& h : result.trajectory) {
      trajectory.push_back(
          std::vector<double>(h.data(), h.data() + h.size()));
    }
    j["trajectory"] = std::move(trajectory);
  }
  return j;
}

nlohmann::json stability_report_to_json(const StabilityReport& report) {
  return {{"spectral_radius", report.spectral_radius},
          {"classification", std::string(to_string(report.classification))},
          {"iterations", report.iterations},
          {"residual", report.residual}};
}

nlohmann::json scatter_payload_json(const ImpactVulnerability& ranking,
                                    const std::vector<BankRecord>& records) {
  auto banks = nlohmann::json::array();
  for (std::size_t i = 0; i < records.size(); ++i) {
    banks.push_back({{"bank_id", records[i].id},
                     {"name", records[i].name},
                     {"total_assets", records[i].total_assets_or_derived()},
                     {"impact", ranking.impact[i]},
                     {"vulnerability", ranking.vulnerability[i]},
                     {"impact_rank", ranking.impact_reverse_rank[i]},
                     {"vulnerability_rank",
                      ranking.vulnerability_reverse_rank[i]}});
  }
  return {{"banks", std::move(banks)}};
}

nlohmann::json ensemble_stat_json(const EnsembleStat& stat) {
  return {{"mean", stat.mean}, {"min", stat.min}, {"max", stat.max}};
}

nlohmann::json manifest_to_json(const RunManifest& manifest) {
  auto inputs = nlohmann::json::array();
  for (const auto& entry : manifest.inputs) {
    inputs.push_back(
        {{"role", entry[0]}, {"path", entry[1]}, {"digest", entry[2]}});
  }
  return {{"tool_version", manifest.tool_version},
          {"command", manifest.command},
          {"inputs", std::move(inputs)},
          {"config", manifest.config},
          {"seed", manifest.seed},
          {"timestamp", manifest.timestamp}};
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buffer;
}

void write_json_file(const std::filesystem::path& path,
                     const nlohmann::json& value) {
  write_text_file(path, value.dump(2) + "\n");
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open '" + path.string() + "' for writing");
  }
  out << text;
  if (!out) {
    throw IoError("failed writing '" + path.string() + "'");
  }
}

}  // namespace debtrank
