"""Effective Hamiltonians of ergodic Hamilton-Jacobi problems by generalized Newton."""

from ._hjcell import (  # noqa: F401
    Boundary,
    ConfigError,
    ContractError,
    DislocationRegime,
    Grid,
    MfgCoupling,
    NewtonConfig,
    NonconvexScheme,
    Problem,
    StopRule,
    dislocation,
    eikonal,
    exact_hbar_eikonal_1d,
    exact_hbar_nonconvex_1d,
    exact_hbar_qpower_1d,
    lstsq,
    mfg,
    multipop_mfg,
    nonconvex,
    plateau_edge,
    run_sweep_json,
    second_order,
    solve,
    weakly_coupled,
)

__version__ = "0.1.0"
