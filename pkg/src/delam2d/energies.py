"""Energy and dissipation functionals on discrete states.

All evaluations are pure functions of immutable inputs.  The model
energy of the adhesive system at stiffness k is

    E_k(t, u, z) = 1/2 int C e(u):e(u)  -  <f(t), u>
                   - a0_k * int z  +  b_k * P(Z)  +  J_k(u, z)

with J_k the adhesive spring energy (k/2) * int z |jump(u)|^2.  The
brittle counterpart replaces J_k by a feasibility indicator of the
constraint "no jump where bonded".  Infinite values are returned as a
guarded sentinel and never used in further arithmetic.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import fem
from .geometry import Mesh2D
from .interface import INFEASIBLE, InterfaceField, is_infeasible, perimeter_count
from .materials import (
    AssembledLoad,
    ModelParams,
    assemble_load,
    brittle_coeffs,
    effective_coeffs,
)

# An exactly zero jump is unattainable in floating point; facet L2 jump
# norms up to this absolute size count as satisfying the no-jump
# constraint of the brittle energy.
BRITTLE_TOL = 1e-9


def ri_dissipation(
    z_new: InterfaceField, z_old: InterfaceField, a1_k: float
) -> float:
    """Dissipated energy of the bonding decrement, INFEASIBLE on re-bonding."""
    if z_new.n_facets != z_old.n_facets:
        raise ValueError(
            f"facet count mismatch: {z_new.n_facets} vs {z_old.n_facets}"
        )
    diff = z_old.values.astype(np.int64) - z_new.values.astype(np.int64)
    if (diff < 0).any():
        return INFEASIBLE
    return float(a1_k * (z_old.lengths * diff).sum())


def perimeter(z: InterfaceField) -> int:
    """Relative perimeter of the bonded set in the open contact segment."""
    return perimeter_count(z.values)


def adhesive_energy(mesh: Mesh2D, u: np.ndarray, z: InterfaceField, k: float) -> float:
    """Spring energy (k/2) * sum over bonded facets of int |jump(u)|^2."""
    jump_sq = fem.facet_jump_sq_integrals(mesh, u)
    return float(0.5 * k * (jump_sq * z.values).sum())


def var_ri(path: list[InterfaceField], a1_k: float) -> float:
    """Dissipation-induced total variation along a discrete bonding path."""
    total = 0.0
    for z_old, z_new in zip(path[:-1], path[1:]):
        inc = ri_dissipation(z_new, z_old, a1_k)
        if is_infeasible(inc):
            return INFEASIBLE
        total += inc
    return total


@dataclass
class LedgerRow:
    """One audited time step (all entries finite by construction)."""

    t: float
    kinetic: float
    viscous_increment: float
    ri_increment: float
    stored_bulk: float
    load_potential: float
    adhesive: float
    surface_linear: float
    perimeter_term: float
    power_integral: float

    COLUMNS = (
        "t",
        "kinetic",
        "viscous_increment",
        "ri_increment",
        "stored_bulk",
        "load_potential",
        "adhesive",
        "surface_linear",
        "perimeter_term",
        "power_integral",
    )

    def stored_total(self) -> float:
        return (
            self.stored_bulk
            + self.load_potential
            + self.surface_linear
            + self.perimeter_term
            + self.adhesive
        )

    def validate(self) -> None:
        vals = [getattr(self, c) for c in self.COLUMNS]
        if not all(np.isfinite(v) for v in vals):
            raise ValueError(f"non-finite ledger entry at t={self.t}")
        if self.ri_increment < 0.0:
            raise ValueError("negative rate-independent increment")
        if self.adhesive < -0.0 or self.perimeter_term < 0.0:
            raise ValueError("negative adhesive or perimeter energy")


@dataclass
class EnergyLedger:
    """Per-step record of all energy and power terms, exportable as CSV."""

    rows: list[LedgerRow] = field(default_factory=list)

    def append(self, row: LedgerRow) -> None:
        row.validate()
        self.rows.append(row)

    def __len__(self) -> int:
        return len(self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(LedgerRow.COLUMNS) + "\n")
        for row in self.rows:
            buf.write(
                ",".join(format(getattr(row, c), ".17g") for c in LedgerRow.COLUMNS)
                + "\n"
            )
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", newline="\n") as fh:
            fh.write(self.to_csv())


class EnergyModel:
    """All functionals of one (mesh, parameters) pair, operators cached."""

    def __init__(self, mesh: Mesh2D, params: ModelParams):
        self.mesh = mesh
        self.params = params
        self.coeffs = effective_coeffs(params)
        self.limit_coeffs = brittle_coeffs(params)
        self.mass = fem.mass_matrix(mesh, params.rho)
        self.stiff_elastic = fem.stiffness_matrix(mesh, params.elastic)
        self.stiff_viscous = fem.stiffness_matrix(mesh, params.viscous)
        self.load: AssembledLoad = assemble_load(mesh, params.load)
        self._lengths = mesh.facet_lengths()

    # -- quadratic forms --------------------------------------------------

    def kinetic(self, velocity: np.ndarray) -> float:
        """(1/2) int rho |v|^2 with the consistent mass matrix."""
        v = np.asarray(velocity, dtype=float)
        return float(0.5 * v @ (self.mass @ v))

    def viscous(self, velocity: np.ndarray) -> float:
        """Viscous dissipation potential (1/2) int D e(v):e(v)."""
        v = np.asarray(velocity, dtype=float)
        return float(0.5 * v @ (self.stiff_viscous @ v))

    def bulk_elastic(self, u: np.ndarray) -> float:
        u = np.asarray(u, dtype=float)
        return float(0.5 * u @ (self.stiff_elastic @ u))

    # -- surface terms -----------------------------------------------------

    def adhesive(self, u: np.ndarray, z: InterfaceField) -> float:
        return adhesive_energy(self.mesh, u, z, self.params.k)

    def surface_linear(self, z: InterfaceField) -> float:
        a0_k = self.coeffs[0]
        return float(-a0_k * (self._lengths * z.values).sum())

    def perimeter_term(self, z: InterfaceField) -> float:
        b_k = self.coeffs[2]
        return b_k * perimeter_count(z.values)

    def ri_dissipation(self, z_new: InterfaceField, z_old: InterfaceField) -> float:
        return ri_dissipation(z_new, z_old, self.coeffs[1])

    # -- energies and power -------------------------------------------------

    def load_potential(self, t: float, u: np.ndarray) -> float:
        if self.load.is_zero():
            return 0.0
        return float(-(self.load.value(t) @ u))

    def stored(self, t: float, u: np.ndarray, z: InterfaceField) -> float:
        """The adhesive-model energy E_k(t, u, z)."""
        return (
            self.bulk_elastic(u)
            + self.load_potential(t, u)
            + self.surface_linear(z)
            + self.perimeter_term(z)
            + self.adhesive(u, z)
        )

    def stored_brittle(self, t: float, u: np.ndarray, z: InterfaceField) -> float:
        """The limit-model energy; INFEASIBLE when a bonded facet jumps.

        Surface coefficients follow the scaling limit: constant scaling
        keeps them, the 1/k scaling zeroes them.
        """
        norms = fem.facet_jump_norms(self.mesh, u)
        bonded = z.values == 1
        if bonded.any() and float(norms[bonded].max()) > BRITTLE_TOL:
            return INFEASIBLE
        a0_inf, _, b_inf = self.limit_coeffs
        return (
            self.bulk_elastic(u)
            + self.load_potential(t, u)
            - a0_inf * float((self._lengths * z.values).sum())
            + b_inf * perimeter_count(z.values)
        )

    def power(self, t: float, u: np.ndarray) -> float:
        """Partial time derivative of the energy, -<df/dt (t), u>."""
        if self.load.is_zero():
            return 0.0
        return float(-(self.load.derivative(t) @ u))

    # -- diagnostics ---------------------------------------------------------

    def facet_mean_sq_jumps(self, u: np.ndarray) -> np.ndarray:
        """g_i = (1/len_i) int_facet_i |jump(u)|^2."""
        return fem.facet_jump_sq_integrals(self.mesh, u) / self._lengths

    def facet_jump_norms(self, u: np.ndarray) -> np.ndarray:
        return fem.facet_jump_norms(self.mesh, u)

    def max_jump_on_support(self, u: np.ndarray, z: InterfaceField) -> float:
        bonded = z.values == 1
        if not bonded.any():
            return 0.0
        return float(fem.facet_jump_norms(self.mesh, u)[bonded].max())


def energy_lower_bound(
    model: EnergyModel, t: float, lam_min: float | None = None
) -> tuple[float, float]:
    """Certified lower bound for the stored energy at time t.

    Returns (bound, lam_min) where lam_min is the smallest generalized
    eigenvalue of the elastic stiffness against the mass matrix on the
    Dirichlet-constrained space.  With the dual load norm measured in
    the mass inner product,

        E_k(t, u, z) >= -|f|_{M^-1}^2 / (2 lam_min) - (a0_k + b_k) |interface|.
    """
    mesh = model.mesh
    free = mesh.free_dofs
    if lam_min is None:
        lam_min = fem.min_generalized_eigenvalue(
            model.stiff_elastic, model.mass, free
        )
    f = model.load.value(t)[free]
    if f.any():
        Mf = model.mass[free][:, free].toarray()
        dual_sq = float(f @ np.linalg.solve(Mf, f))
    else:
        dual_sq = 0.0
    a0_k, _, b_k = model.coeffs
    bound = -dual_sq / (2.0 * lam_min) - (a0_k + b_k) * mesh.interface_measure()
    return bound, lam_min
