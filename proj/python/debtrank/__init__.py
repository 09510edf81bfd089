"""Interbank stress testing: loss contagion over exposure networks.

The heavy lifting lives in the compiled extension; this package re-exports
its public surface.
"""

from debtrank._core import (
    BankRecord,
    BankingSystem,
    DefaultEvent,
    EngineError,
    ImpactVulnerability,
    ParseFailure,
    StabilityReport,
    StressResult,
    ValidationError,
    __version__,
    alpha_sweep,
    build_system,
    linear_fixed_point,
    load_balance_csv,
    load_system_csv,
    reconstruct_ensemble,
    run_contagion,
    run_impact_vulnerability,
    simulate_equity,
    single_shock,
    spectral_radius,
    stability_after_defaults,
    uniform_shock,
)

__all__ = [
    "BankRecord",
    "BankingSystem",
    "DefaultEvent",
    "EngineError",
    "ImpactVulnerability",
    "ParseFailure",
    "StabilityReport",
    "StressResult",
    "ValidationError",
    "__version__",
    "alpha_sweep",
    "build_system",
    "linear_fixed_point",
    "load_balance_csv",
    "load_system_csv",
    "reconstruct_ensemble",
    "run_contagion",
    "run_impact_vulnerability",
    "simulate_equity",
    "single_shock",
    "spectral_radius",
    "stability_after_defaults",
    "uniform_shock",
]
