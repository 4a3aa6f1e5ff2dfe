"""Fractional Helmholtz scattering: Green's functions, forward solves, far fields and Born inversion."""

from ._core import (
    AcceptanceResult,
    Branch,
    ConfigError,
    DomainError,
    Error,
    FormatError,
    GreensMethod,
    NumericError,
    PotentialGrid,
    ProblemParams,
    construct_solution,
    direction_set,
    far_field,
    far_field_prefactor,
    greens,
    multiplier_value,
    pick_exponents,
    probe_geometry,
    read_farfield,
    read_potential,
    reconstruct,
    run_acceptance,
    run_scenario,
    solve,
    write_potential,
)

__all__ = [name for name in dir() if not name.startswith("_")]
