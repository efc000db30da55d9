"""Visco-elastodynamic delamination between two bonded blocks.

A desk-scale 2D finite element simulator: Kelvin-Voigt blocks coupled
by a breakable adhesive interface, evolved by alternating minimization
(implicit displacement solve, then an exact binary bonding update with
a perimeter penalty), with an energy ledger and a stiffness-sweep
harness that audits the approach to the brittle limit.
"""

from .geometry import Mesh2D, build_two_block_mesh, jump, sym_anti_split
from .interface import (
    InterfaceField,
    certify_semistability,
    facet_costs,
    minimize_z_dp,
)
from .materials import (
    LoadComponent,
    LoadSchedule,
    ModelParams,
    ScalingMode,
    TimeProfile,
    effective_coeffs,
    isotropic_tensor,
)
from .energies import EnergyLedger, EnergyModel, adhesive_energy, perimeter, ri_dissipation
from .momentum import (
    KinematicState,
    MomentumSolver,
    SparseSPD,
    assemble_step_system,
    recovery_lift,
    solve_spd,
)
from .evolution import Trajectory
from .limits import Scenario, SweepReport, brittle_residuals, run_sweep, support_distance

__version__ = "0.1.0"

__all__ = [
    "Mesh2D",
    "build_two_block_mesh",
    "jump",
    "sym_anti_split",
    "InterfaceField",
    "certify_semistability",
    "facet_costs",
    "minimize_z_dp",
    "LoadComponent",
    "LoadSchedule",
    "ModelParams",
    "ScalingMode",
    "TimeProfile",
    "effective_coeffs",
    "isotropic_tensor",
    "EnergyLedger",
    "EnergyModel",
    "adhesive_energy",
    "perimeter",
    "ri_dissipation",
    "KinematicState",
    "MomentumSolver",
    "SparseSPD",
    "assemble_step_system",
    "recovery_lift",
    "solve_spd",
    "Trajectory",
    "Scenario",
    "SweepReport",
    "brittle_residuals",
    "run_sweep",
    "support_distance",
]
