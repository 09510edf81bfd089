#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>

#include "debtrank/contagion.hpp"
#include "debtrank/errors.hpp"
#include "debtrank/io.hpp"
#include "debtrank/reconstruction.hpp"
#include "debtrank/scenarios.hpp"
#include "debtrank/spectral.hpp"
#include "debtrank/system.hpp"
#include "debtrank/version.hpp"

namespace py = pybind11;
using namespace debtrank;

namespace {

RunConfig make_run_config(double tol, std::optional<std::size_t> max_steps,
                          const std::string& mode) {
  RunConfig config;
  config.tol = tol;
  config.max_steps = max_steps;
  if (mode == "generalized") {
    config.mode = ContagionMode::kGeneralized;
  } else if (mode == "debtrank") {
    config.mode = ContagionMode::kOriginalDebtRank;
  } else {
    throw ValidationError("mode must be 'generalized' or 'debtrank'");
  }
  return config;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Interbank stress testing: contagion dynamics, spectral "
            "stability, and exposure network reconstruction";
  m.attr("__version__") = kVersion;

  // translators run newest-first, so the base class must be registered
  // before the refinements
  py::register_exception<Error>(m, "EngineError", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError",
                                          PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseFailure", PyExc_ValueError);

  py::class_<BankRecord>(m, "BankRecord")
      .def(py::init([](std::string id, std::string name, double equity,
                       double external_assets, double external_liabilities,
                       double interbank_assets, double interbank_liabilities,
                       std::optional<double> total_assets) {
             BankRecord r;
             r.id = std::move(id);
             r.name = std::move(name);
             r.equity0 = equity;
             r.external_assets = external_assets;
             r.external_liabilities = external_liabilities;
             r.interbank_assets_total = interbank_assets;
             r.interbank_liabilities_total = interbank_liabilities;
             r.total_assets = total_assets;
             return r;
           }),
           py::arg("id"), py::arg("name"), py::arg("equity"),
           py::arg("external_assets"), py::arg("external_liabilities"),
           py::arg("interbank_assets"), py::arg("interbank_liabilities"),
           py::arg("total_assets") = std::nullopt)
      .def_readonly("id", &BankRecord::id)
      .def_readonly("name", &BankRecord::name)
      .def_readonly("equity", &BankRecord::equity0)
      .def_readonly("external_assets", &BankRecord::external_assets)
      .def_readonly("external_liabilities", &BankRecord::external_liabilities)
      .def_readonly("interbank_assets", &BankRecord::interbank_assets_total)
      .def_readonly("interbank_liabilities",
                    &BankRecord::interbank_liabilities_total)
      .def_property_readonly("total_assets",
                             &BankRecord::total_assets_or_derived)
      .def("__repr__", [](const BankRecord& r) {
        return "<BankRecord " + r.id + " equity=" +
               std::to_string(r.equity0) + ">";
      });

  py::class_<BankingSystem>(m, "BankingSystem")
      .def_property_readonly("n_banks", &BankingSystem::size)
      .def_property_readonly("records", &BankingSystem::records)
      .def_property_readonly(
          "exposures",
          [](const BankingSystem& s) { return s.exposures().values(); })
      .def_property_readonly(
          "leverage",
          [](const BankingSystem& s) { return s.leverage().lambda; })
      .def_property_readonly(
          "leverage_equity",
          [](const BankingSystem& s) { return s.leverage().lambda_tilde; })
      .def_property_readonly("equity", &BankingSystem::equity0)
      .def_property_readonly("external_assets",
                             &BankingSystem::external_assets)
      .def("find_bank", [](const BankingSystem& s, const std::string& id) {
        return s.find_bank(id);
      });

  py::class_<DefaultEvent>(m, "DefaultEvent")
      .def_readonly("bank", &DefaultEvent::bank)
      .def_readonly("step", &DefaultEvent::step);

  py::class_<StressResult>(m, "StressResult")
      .def_readonly("h_final", &StressResult::h_final)
      .def_readonly("trajectory", &StressResult::trajectory)
      .def_readonly("defaults", &StressResult::defaults)
      .def_readonly("steps", &StressResult::steps_to_convergence)
      .def_readonly("converged", &StressResult::converged)
      .def_readonly("H_series", &StressResult::aggregate_series);

  py::class_<StabilityReport>(m, "StabilityReport")
      .def_readonly("spectral_radius", &StabilityReport::spectral_radius)
      .def_readonly("iterations", &StabilityReport::iterations)
      .def_readonly("residual", &StabilityReport::residual)
      .def_readonly("used_dense_fallback",
                    &StabilityReport::used_dense_fallback)
      .def_property_readonly("classification", [](const StabilityReport& r) {
        return std::string(to_string(r.classification));
      });

  py::class_<ImpactVulnerability>(m, "ImpactVulnerability")
      .def_readonly("impact", &ImpactVulnerability::impact)
      .def_readonly("vulnerability", &ImpactVulnerability::vulnerability)
      .def_readonly("impact_rank", &ImpactVulnerability::impact_reverse_rank)
      .def_readonly("vulnerability_rank",
                    &ImpactVulnerability::vulnerability_reverse_rank)
      .def_readonly("total_assets", &ImpactVulnerability::total_assets);

  m.def("build_system",
        [](std::vector<BankRecord> records, Eigen::MatrixXd exposures) {
          return build_system(std::move(records),
                              ExposureMatrix(std::move(exposures)));
        },
        py::arg("records"), py::arg("exposures"),
        "Validate records and exposures into an immutable system");

  m.def("load_balance_csv", &load_balance_csv, py::arg("path"));
  m.def("load_system_csv",
        [](const std::filesystem::path& balance,
           const std::filesystem::path& exposures) {
          auto records = load_balance_csv(balance);
          auto matrix = load_exposures_csv(exposures, records);
          return build_system(std::move(records), std::move(matrix));
        },
        py::arg("balance"), py::arg("exposures"));

  m.def("uniform_shock",
        [](const BankingSystem& system, double alpha) {
          return build_shock(ShockSpec::uniform(alpha), system);
        },
        py::arg("system"), py::arg("alpha"));
  m.def("single_shock",
        [](const BankingSystem& system, std::size_t bank, double alpha) {
          return build_shock(ShockSpec::single(bank, alpha), system);
        },
        py::arg("system"), py::arg("bank"), py::arg("alpha"));

  m.def("run_contagion",
        [](const BankingSystem& system, const Eigen::VectorXd& h1, double tol,
           std::optional<std::size_t> max_steps, const std::string& mode) {
          return run_contagion(system, h1,
                               make_run_config(tol, max_steps, mode));
        },
        py::arg("system"), py::arg("shock"), py::arg("tol") = 1e-10,
        py::arg("max_steps") = std::nullopt,
        py::arg("mode") = "generalized",
        "Iterate the loss dynamics to convergence");

  m.def("simulate_equity",
        [](const BankingSystem& system, const Eigen::VectorXd& h1, double tol,
           std::optional<std::size_t> max_steps) {
          return simulate_equity(system, h1,
                                 make_run_config(tol, max_steps,
                                                 "generalized"));
        },
        py::arg("system"), py::arg("shock"), py::arg("tol") = 1e-10,
        py::arg("max_steps") = std::nullopt);

  m.def("spectral_radius",
        [](const Eigen::MatrixXd& matrix, double tol, std::size_t max_iter) {
          return spectral_radius(matrix, tol, max_iter);
        },
        py::arg("matrix"), py::arg("tol") = 1e-12,
        py::arg("max_iter") = 10000);
  m.def("linear_fixed_point", &linear_fixed_point, py::arg("leverage"),
        py::arg("shock"));
  m.def("stability_after_defaults",
        [](const BankingSystem& system, std::vector<std::size_t> active) {
          return stability_after_defaults(system, active);
        },
        py::arg("system"), py::arg("active"));

  m.def("reconstruct_ensemble",
        [](std::vector<BankRecord> records, double density,
           std::size_t ensemble, std::uint64_t seed, double ras_tol,
           std::size_t ras_max_iter, unsigned threads) {
          ReconstructionConfig config;
          config.target_density = density;
          config.ensemble_size = ensemble;
          config.seed = seed;
          config.ras_tol = ras_tol;
          config.ras_max_iter = ras_max_iter;
          return reconstruct_ensemble(records, config, threads);
        },
        py::arg("records"), py::arg("density") = 0.05,
        py::arg("ensemble") = 100, py::arg("seed") = 0,
        py::arg("ras_tol") = 1e-8, py::arg("ras_max_iter") = 10000,
        py::arg("threads") = 1,
        "Sample exposure networks matching the interbank margins");

  m.def("run_impact_vulnerability",
        [](const std::vector<BankingSystem>& systems, double alpha, double tol,
           const std::string& mode, unsigned threads) {
          return run_impact_vulnerability(
              systems, alpha, make_run_config(tol, std::nullopt, mode),
              threads);
        },
        py::arg("systems"), py::arg("alpha") = 0.01, py::arg("tol") = 1e-10,
        py::arg("mode") = "generalized", py::arg("threads") = 1);

  m.def("alpha_sweep",
        [](const std::vector<BankingSystem>& systems,
           const std::vector<double>& alphas, double tol,
           const std::string& mode, unsigned threads) {
          auto rows = alpha_sweep(systems, alphas,
                                  make_run_config(tol, std::nullopt, mode),
                                  threads);
          py::list out;
          for (const auto& row : rows) {
            py::dict d;
            d["alpha"] = row.alpha;
            d["direct_loss"] = row.direct_loss.mean;
            d["final_loss"] = row.final_loss.mean;
            d["amplification"] = row.amplification.mean;
            out.append(std::move(d));
          }
          return out;
        },
        py::arg("systems"), py::arg("alphas"), py::arg("tol") = 1e-10,
        py::arg("mode") = "generalized", py::arg("threads") = 1);
}
