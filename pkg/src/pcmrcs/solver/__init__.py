"""Periodic unit-cell FDTD solver (compiled kernels with a numpy fallback)."""

from ._backend import NAME as BACKEND
from .fdtd import (
    Calibration,
    Pulse,
    SolverConfig,
    config_hash,
    dft,
    numerical_wavenumber,
    run_reference,
    run_unit_cell,
    simulate_cell,
    time_step,
)

__all__ = [
    "BACKEND",
    "Calibration",
    "Pulse",
    "SolverConfig",
    "config_hash",
    "dft",
    "numerical_wavenumber",
    "run_reference",
    "run_unit_cell",
    "simulate_cell",
    "time_step",
]
