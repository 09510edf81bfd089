// Command line front end: network reconstruction, stability analysis, and
// stress scenarios over balance-sheet CSV inputs.
#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "debtrank/contagion.hpp"
#include "debtrank/errors.hpp"
#include "debtrank/io.hpp"
#include "debtrank/reconstruction.hpp"
#include "debtrank/scenarios.hpp"
#include "debtrank/spectral.hpp"
#include "debtrank/system.hpp"
#include "debtrank/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  std::string balance_path;
  std::string exposures_path;
  std::string config_path;
  std::string out_dir = ".";
  double alpha = 0.01;
  std::vector<double> alphas;
  double density = 0.05;
  std::size_t ensemble = 100;
  std::uint64_t seed = 42;
  double tol = 1e-10;
  std::optional<std::size_t> max_steps;
  double ras_tol = 1e-8;
  std::size_t ras_max_iter = 10000;
  std::string mode = "generalized";
  bool trace = false;
  unsigned threads = 1;
};

unsigned env_threads() {
  if (const char* env = std::getenv("DEBTRANK_THREADS")) {
    const long parsed = std::strtol(env, nullptr, 10);
    if (parsed > 0) return static_cast<unsigned>(parsed);
  }
  return 1;
}

// The config file may be a bare parameter object or a manifest from an
// earlier run, in which case its "config" object is used.
json load_config_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw debtrank::IoError("cannot open config '" + path + "'");
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw debtrank::ParseError(1, 1, std::string("config: ") + e.what());
  }
  if (j.is_object() && j.contains("config") && j["config"].is_object()) {
    j = j["config"];
  }
  if (!j.is_object()) {
    throw debtrank::ValidationError("config file must hold a JSON object");
  }
  return j;
}

template <typename T>
void pull(const json& j, const char* key, T& into) {
  if (j.contains(key)) {
    try {
      into = j.at(key).get<T>();
    } catch (const json::exception&) {
      throw debtrank::ValidationError(std::string("config key '") + key +
                                      "' has the wrong type");
    }
  }
}

// Config file values fill in anything the command line left untouched.
void apply_config_file(const CLI::App& cmd, Options& opt) {
  if (opt.config_path.empty()) return;
  const json j = load_config_json(opt.config_path);
  const auto untouched = [&](const std::string& flag) {
    const CLI::Option* o = cmd.get_option_no_throw(flag);
    return o == nullptr || o->count() == 0;
  };
  if (untouched("--alpha")) pull(j, "alpha", opt.alpha);
  if (untouched("--alphas")) pull(j, "alphas", opt.alphas);
  if (untouched("--density")) pull(j, "density", opt.density);
  if (untouched("--ensemble")) pull(j, "ensemble", opt.ensemble);
  if (untouched("--seed")) pull(j, "seed", opt.seed);
  if (untouched("--tol")) pull(j, "tol", opt.tol);
  if (untouched("--max-steps") && j.contains("max_steps") &&
      !j["max_steps"].is_null()) {
    std::size_t steps = 0;
    pull(j, "max_steps", steps);
    opt.max_steps = steps;
  }
  if (untouched("--ras-tol")) pull(j, "ras_tol", opt.ras_tol);
  if (untouched("--ras-max-iter")) pull(j, "ras_max_iter", opt.ras_max_iter);
  if (untouched("--mode")) pull(j, "mode", opt.mode);
  if (untouched("--trace")) pull(j, "trace", opt.trace);
}

debtrank::RunConfig run_config(const Options& opt) {
  debtrank::RunConfig config;
  config.tol = opt.tol;
  config.max_steps = opt.max_steps;
  if (opt.mode == "generalized") {
    config.mode = debtrank::ContagionMode::kGeneralized;
  } else if (opt.mode == "debtrank") {
    config.mode = debtrank::ContagionMode::kOriginalDebtRank;
  } else {
    throw debtrank::ValidationError(
        "mode must be 'generalized' or 'debtrank', got '" + opt.mode + "'");
  }
  return config;
}

debtrank::ReconstructionConfig reconstruction_config(const Options& opt) {
  debtrank::ReconstructionConfig config;
  config.target_density = opt.density;
  config.ensemble_size = opt.ensemble;
  config.ras_tol = opt.ras_tol;
  config.ras_max_iter = opt.ras_max_iter;
  config.seed = opt.seed;
  return config;
}

// Execution details (thread count, output directory) stay out of the
// manifest config so reruns on different hosts produce comparable manifests.
json semantic_config(const Options& opt, const std::string& subcommand) {
  json config{{"tol", opt.tol},
              {"mode", opt.mode},
              {"seed", opt.seed}};
  if (opt.max_steps) {
    config["max_steps"] = *opt.max_steps;
  }
  if (subcommand == "uniform" || subcommand == "impact") {
    config["alpha"] = opt.alpha;
  }
  if (subcommand == "sweep") {
    config["alphas"] = opt.alphas;
  }
  if (subcommand == "uniform" || subcommand == "impact" ||
      subcommand == "sweep" || subcommand == "reconstruct" ||
      subcommand == "stability") {
    if (opt.exposures_path.empty() || subcommand == "reconstruct") {
      config["density"] = opt.density;
      config["ensemble"] = opt.ensemble;
      config["ras_tol"] = opt.ras_tol;
      config["ras_max_iter"] = opt.ras_max_iter;
    }
  }
  if (subcommand == "uniform" || subcommand == "impact") {
    config["trace"] = opt.trace;
  }
  return config;
}

debtrank::RunManifest make_manifest(const Options& opt,
                                    const std::string& subcommand) {
  debtrank::RunManifest manifest;
  manifest.tool_version = debtrank::kVersion;
  std::string command = subcommand + " --balance " + opt.balance_path;
  if (!opt.exposures_path.empty()) {
    command += " --exposures " + opt.exposures_path;
  }
  manifest.command = command;
  manifest.inputs.push_back(
      {"balance", opt.balance_path, debtrank::file_digest(opt.balance_path)});
  if (!opt.exposures_path.empty()) {
    manifest.inputs.push_back({"exposures", opt.exposures_path,
                               debtrank::file_digest(opt.exposures_path)});
  }
  if (!opt.config_path.empty()) {
    manifest.inputs.push_back(
        {"config", opt.config_path, debtrank::file_digest(opt.config_path)});
  }
  manifest.config = semantic_config(opt, subcommand);
  manifest.seed = opt.seed;
  manifest.timestamp = debtrank::utc_timestamp();
  return manifest;
}

struct LoadedInputs {
  std::vector<debtrank::BankRecord> records;
  std::vector<debtrank::BankingSystem> systems;
  bool reconstructed = false;
};

// Either the observed exposure matrix or a reconstructed ensemble.
LoadedInputs load_systems(const Options& opt) {
  LoadedInputs loaded;
  loaded.records = debtrank::load_balance_csv(opt.balance_path);
  if (!opt.exposures_path.empty()) {
    auto exposures =
        debtrank::load_exposures_csv(opt.exposures_path, loaded.records);
    loaded.systems.push_back(
        debtrank::build_system(loaded.records, std::move(exposures)));
  } else {
    loaded.systems = debtrank::reconstruct_ensemble(
        loaded.records, reconstruction_config(opt), opt.threads);
    loaded.reconstructed = true;
  }
  return loaded;
}

void ensure_out_dir(const Options& opt) {
  std::error_code ec;
  fs::create_directories(opt.out_dir, ec);
  if (ec) {
    throw debtrank::IoError("cannot create output directory '" + opt.out_dir +
                            "': " + ec.message());
  }
}

void write_manifest(const Options& opt, const std::string& subcommand) {
  debtrank::write_json_file(fs::path(opt.out_dir) / "manifest.json",
                            debtrank::manifest_to_json(
                                make_manifest(opt, subcommand)));
}

std::string sample_name(std::size_t index) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "sample_%04zu.csv", index);
  return buffer;
}

int cmd_reconstruct(const Options& opt) {
  ensure_out_dir(opt);
  auto records = debtrank::load_balance_csv(opt.balance_path);
  auto rescaled = debtrank::rescale_liabilities(records);
  const auto fitness = debtrank::fitness_vectors(rescaled);
  const double z = debtrank::calibrate_z(fitness, opt.density);
  auto systems = debtrank::reconstruct_ensemble(
      records, reconstruction_config(opt), opt.threads);

  const double slots = static_cast<double>(systems[0].size()) *
                       static_cast<double>(systems[0].size() - 1);
  json samples = json::array();
  std::vector<double> densities;
  for (std::size_t k = 0; k < systems.size(); ++k) {
    const fs::path file = fs::path(opt.out_dir) / sample_name(k);
    debtrank::write_exposures_csv(file, systems[k].exposures(),
                                  systems[k].records());
    const double links =
        (systems[k].exposures().values().array() > 0.0).count();
    densities.push_back(links / slots);
    samples.push_back({{"file", sample_name(k)},
                       {"digest", debtrank::file_digest(file)},
                       {"links", static_cast<std::size_t>(links)}});
  }
  double mean = 0.0, lo = densities[0], hi = densities[0];
  for (double d : densities) {
    mean += d;
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  mean /= static_cast<double>(densities.size());

  json out{{"n_samples", systems.size()},
           {"n_banks", systems[0].size()},
           {"target_density", opt.density},
           {"z", z},
           {"achieved_density", {{"mean", mean}, {"min", lo}, {"max", hi}}},
           {"samples", std::move(samples)}};
  debtrank::write_json_file(fs::path(opt.out_dir) / "ensemble.json", out);
  write_manifest(opt, "reconstruct");
  std::cout << "reconstructed " << systems.size() << " samples at z = " << z
            << " into " << opt.out_dir << "\n";
  return 0;
}

int cmd_stability(const Options& opt) {
  ensure_out_dir(opt);
  auto loaded = load_systems(opt);

  json out;
  json reports = json::array();
  std::vector<double> radii;
  std::size_t stable = 0, unstable = 0, critical = 0;
  for (const auto& system : loaded.systems) {
    auto report = debtrank::spectral_radius(system.leverage().lambda);
    radii.push_back(report.spectral_radius);
    switch (report.classification) {
      case debtrank::StabilityClass::kStable: ++stable; break;
      case debtrank::StabilityClass::kUnstable: ++unstable; break;
      case debtrank::StabilityClass::kCritical: ++critical; break;
    }
    reports.push_back(debtrank::stability_report_to_json(report));
  }
  if (loaded.systems.size() == 1 && !loaded.reconstructed) {
    out = reports[0];
  } else {
    double mean = 0.0, lo = radii[0], hi = radii[0];
    for (double r : radii) {
      mean += r;
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    mean /= static_cast<double>(radii.size());
    out["reports"] = std::move(reports);
    out["summary"] = {{"spectral_radius",
                       {{"mean", mean}, {"min", lo}, {"max", hi}}},
                      {"classifications",
                       {{"STABLE", stable},
                        {"UNSTABLE", unstable},
                        {"CRITICAL", critical}}}};
  }
  debtrank::write_json_file(fs::path(opt.out_dir) / "stability.json", out);
  write_manifest(opt, "stability");
  if (loaded.systems.size() == 1 && !loaded.reconstructed) {
    std::cout << "spectral radius " << out["spectral_radius"].get<double>()
              << " (" << out["classification"].get<std::string>() << ")\n";
  } else {
    std::cout << "analyzed " << loaded.systems.size() << " samples: "
              << stable << " stable, " << unstable << " unstable, "
              << critical << " critical\n";
  }
  return 0;
}

int cmd_uniform(const Options& opt) {
  ensure_out_dir(opt);
  auto loaded = load_systems(opt);
  auto scenario = debtrank::run_uniform_scenario(loaded.systems, opt.alpha,
                                                 run_config(opt), opt.threads);

  json results = json::array();
  for (std::size_t k = 0; k < scenario.results.size(); ++k) {
    results.push_back(debtrank::stress_result_to_json(
        scenario.results[k], loaded.systems[k].records(), opt.trace));
  }
  json out{{"alpha", scenario.alpha},
           {"n_systems", loaded.systems.size()},
           {"direct_loss", debtrank::ensemble_stat_json(scenario.direct_loss)},
           {"final_loss", debtrank::ensemble_stat_json(scenario.final_loss)},
           {"amplification",
            debtrank::ensemble_stat_json(scenario.amplification)},
           {"results", std::move(results)}};
  debtrank::write_json_file(fs::path(opt.out_dir) / "uniform.json", out);
  write_manifest(opt, "uniform");
  std::cout << "uniform shock alpha = " << opt.alpha << ": direct loss "
            << scenario.direct_loss.mean << ", final loss "
            << scenario.final_loss.mean << ", amplification "
            << scenario.amplification.mean << "\n";
  return 0;
}

int cmd_impact(const Options& opt) {
  ensure_out_dir(opt);
  auto loaded = load_systems(opt);
  auto ranking = debtrank::run_impact_vulnerability(
      loaded.systems, opt.alpha, run_config(opt), opt.threads);

  debtrank::write_rankings_csv(fs::path(opt.out_dir) / "rankings.csv", ranking,
                               loaded.records);
  json scatter = debtrank::scatter_payload_json(ranking, loaded.records);
  scatter["alpha"] = opt.alpha;
  scatter["n_systems"] = loaded.systems.size();
  debtrank::write_json_file(fs::path(opt.out_dir) / "scatter.json", scatter);
  write_manifest(opt, "impact");
  std::cout << "ranked " << loaded.records.size() << " banks over "
            << loaded.systems.size() << " systems\n";
  return 0;
}

int cmd_sweep(const Options& opt) {
  if (opt.alphas.empty()) {
    throw debtrank::ValidationError(
        "sweep needs at least one shock size (--alphas)");
  }
  ensure_out_dir(opt);
  auto loaded = load_systems(opt);
  auto rows = debtrank::alpha_sweep(loaded.systems, opt.alphas,
                                    run_config(opt), opt.threads);

  std::ostringstream csv;
  csv << "alpha,direct_loss_mean,direct_loss_min,direct_loss_max,"
         "final_loss_mean,final_loss_min,final_loss_max,"
         "amplification_mean,amplification_min,amplification_max\n";
  json json_rows = json::array();
  for (const auto& row : rows) {
    csv << debtrank::format_double(row.alpha) << ','
        << debtrank::format_double(row.direct_loss.mean) << ','
        << debtrank::format_double(row.direct_loss.min) << ','
        << debtrank::format_double(row.direct_loss.max) << ','
        << debtrank::format_double(row.final_loss.mean) << ','
        << debtrank::format_double(row.final_loss.min) << ','
        << debtrank::format_double(row.final_loss.max) << ','
        << debtrank::format_double(row.amplification.mean) << ','
        << debtrank::format_double(row.amplification.min) << ','
        << debtrank::format_double(row.amplification.max) << "\n";
    json_rows.push_back(
        {{"alpha", row.alpha},
         {"direct_loss", debtrank::ensemble_stat_json(row.direct_loss)},
         {"final_loss", debtrank::ensemble_stat_json(row.final_loss)},
         {"amplification",
          debtrank::ensemble_stat_json(row.amplification)}});
  }
  debtrank::write_text_file(fs::path(opt.out_dir) / "sweep.csv", csv.str());
  json out{{"n_systems", loaded.systems.size()},
           {"rows", std::move(json_rows)}};
  debtrank::write_json_file(fs::path(opt.out_dir) / "sweep.json", out);
  write_manifest(opt, "sweep");
  std::cout << "swept " << rows.size() << " shock sizes over "
            << loaded.systems.size() << " systems\n";
  return 0;
}

const char* error_kind(const debtrank::Error& e) {
  if (dynamic_cast<const debtrank::ParseError*>(&e)) return "parse";
  if (dynamic_cast<const debtrank::UnsupportedMarginError*>(&e))
    return "unsupported_margin";
  if (dynamic_cast<const debtrank::RasNotConvergedError*>(&e))
    return "ras_not_converged";
  if (dynamic_cast<const debtrank::UnachievableDensityError*>(&e))
    return "unachievable_density";
  if (dynamic_cast<const debtrank::ExhaustedRedrawsError*>(&e))
    return "exhausted_redraws";
  if (dynamic_cast<const debtrank::ZeroTotalError*>(&e)) return "zero_total";
  if (dynamic_cast<const debtrank::SingularSystemError*>(&e))
    return "singular_system";
  if (dynamic_cast<const debtrank::UnknownBankError*>(&e))
    return "unknown_bank";
  if (dynamic_cast<const debtrank::NegativeAlphaError*>(&e))
    return "negative_alpha";
  if (dynamic_cast<const debtrank::NegativeZError*>(&e)) return "negative_z";
  if (dynamic_cast<const debtrank::ValidationError*>(&e)) return "validation";
  if (dynamic_cast<const debtrank::IoError*>(&e)) return "io";
  return "error";
}

void add_common(CLI::App* cmd, Options& opt, bool with_exposures,
                bool with_reconstruction) {
  cmd->add_option("--balance", opt.balance_path,
                  "balance sheet CSV (bank_id,name,equity,...)")
      ->required();
  if (with_exposures) {
    cmd->add_option("--exposures", opt.exposures_path,
                    "observed exposure edge list; omit to reconstruct");
  }
  cmd->add_option("--out", opt.out_dir, "output directory (default .)");
  cmd->add_option("--config", opt.config_path,
                  "JSON config file or a manifest from an earlier run");
  cmd->add_option("--seed", opt.seed, "RNG seed for reconstruction");
  cmd->add_option("--threads", opt.threads,
                  "worker threads (results do not depend on this)");
  if (with_reconstruction) {
    cmd->add_option("--density", opt.density,
                    "target link density for reconstruction");
    cmd->add_option("--ensemble", opt.ensemble,
                    "number of reconstructed networks");
    cmd->add_option("--ras-tol", opt.ras_tol,
                    "relative margin tolerance for balancing");
    cmd->add_option("--ras-max-iter", opt.ras_max_iter,
                    "balancing iteration cap");
  }
}

void add_dynamics(CLI::App* cmd, Options& opt) {
  cmd->add_option("--tol", opt.tol, "convergence threshold on loss steps");
  cmd->add_option("--max-steps", opt.max_steps,
                  "iteration cap (default 10 N + 1000)");
  cmd->add_option("--mode", opt.mode,
                  "dynamics: 'generalized' or 'debtrank'")
      ->check(CLI::IsMember({"generalized", "debtrank"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interbank stress testing: contagion dynamics, stability "
               "analysis, and network reconstruction"};
  app.require_subcommand(1);

  Options opt;
  opt.threads = env_threads();

  CLI::App* reconstruct = app.add_subcommand(
      "reconstruct", "sample exposure networks consistent with the margins");
  add_common(reconstruct, opt, false, true);

  CLI::App* stability = app.add_subcommand(
      "stability", "spectral radius of the leverage matrix");
  add_common(stability, opt, true, true);

  CLI::App* uniform = app.add_subcommand(
      "uniform", "devalue every bank's external assets and track losses");
  add_common(uniform, opt, true, true);
  add_dynamics(uniform, opt);
  uniform->add_option("--alpha", opt.alpha, "external asset devaluation");
  uniform->add_flag("--trace", opt.trace, "include per-step trajectories");

  CLI::App* impact = app.add_subcommand(
      "impact", "per-bank impact and vulnerability rankings");
  add_common(impact, opt, true, true);
  add_dynamics(impact, opt);
  impact->add_option("--alpha", opt.alpha, "external asset devaluation");
  impact->add_flag("--trace", opt.trace, "include per-step trajectories");

  CLI::App* sweep = app.add_subcommand(
      "sweep", "uniform scenario over a grid of shock sizes");
  add_common(sweep, opt, true, true);
  add_dynamics(sweep, opt);
  sweep->add_option("--alphas", opt.alphas, "comma-separated shock sizes")
      ->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  CLI::App* active = app.get_subcommands().front();
  try {
    apply_config_file(*active, opt);
    if (active == reconstruct) return cmd_reconstruct(opt);
    if (active == stability) return cmd_stability(opt);
    if (active == uniform) return cmd_uniform(opt);
    if (active == impact) return cmd_impact(opt);
    if (active == sweep) return cmd_sweep(opt);
    return 1;
  } catch (const debtrank::Error& e) {
    const json err{{"error", {{"kind", error_kind(e)}, {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    const json err{{"error", {{"kind", "internal"}, {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return 3;
  }
}
