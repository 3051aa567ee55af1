"""Envelope theory for N identical particles with a variational three-body reference."""

from etk.model import (
    EnvelopeSolution,
    QuantumNumbers,
    SystemSpec,
    VariationalCharacter,
    global_Q,
    orbital_lambda,
    pair_count,
    relative_error,
)
from etk.potentials import classify_character, make_potential, nonrel
from etk.et_core import solve_compact, solve_power_law, solve_trunc_coulomb
from etk.improvement import compute_phi, solve_improved
from etk.oracle import GaussianBasisConfig, OracleResult, oracle_ground_energy

__all__ = [
    "EnvelopeSolution",
    "GaussianBasisConfig",
    "OracleResult",
    "QuantumNumbers",
    "SystemSpec",
    "VariationalCharacter",
    "classify_character",
    "compute_phi",
    "global_Q",
    "make_potential",
    "nonrel",
    "oracle_ground_energy",
    "orbital_lambda",
    "pair_count",
    "relative_error",
    "solve_compact",
    "solve_improved",
    "solve_power_law",
    "solve_trunc_coulomb",
]
__version__ = "0.1.0"
