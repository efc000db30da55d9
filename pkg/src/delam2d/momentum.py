"""Displacement half of the alternating scheme.

Each time step solves the convex incremental problem

    min_u  1/(2 tau^2) |u - 2u_last + u_before|^2_M
           + tau * Visc((u - u_last)/tau) + E_k(t_new, u, z)

at frozen bonding z, whose stationarity condition is the implicit
discretization of the weak momentum balance: inertia by a second-order
central difference, Kelvin-Voigt viscosity, elasticity, the adhesive
spring on bonded facets, and the external load at the new time.
Dirichlet dofs are eliminated by row/column removal, keeping the system
symmetric positive definite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from . import fem
from .energies import EnergyModel
from .geometry import Mesh2D, sym_anti_split
from .interface import InterfaceField
from .materials import ModelParams, assemble_load

DENSE_SOLVE_LIMIT = 2000
CG_MAX_ITER = 10_000
CG_RTOL = 1e-12
SOLVE_RTOL = 1e-10


class SolverError(RuntimeError):
    """Linear solver failure; carries the final relative residual."""

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


@dataclass
class KinematicState:
    """The two most recent displacements plus one more for the inertia.

    ``u`` and ``u_prev`` drive the next implicit solve; ``u_prev2``
    lets the state report its own second difference (acceleration).
    All Dirichlet dofs are exactly zero in all three snapshots.
    """

    u: np.ndarray
    u_prev: np.ndarray
    u_prev2: np.ndarray
    t: float

    @classmethod
    def initial(cls, u0: np.ndarray, u1: np.ndarray, tau: float) -> "KinematicState":
        # Encodes the initial velocity: the fictitious pre-step
        # displacement u0 - tau*u1 makes (u - u_prev)/tau = u1 at t = 0.
        u0 = np.asarray(u0, dtype=float)
        u1 = np.asarray(u1, dtype=float)
        return cls(u=u0.copy(), u_prev=u0 - tau * u1, u_prev2=u0 - 2.0 * tau * u1, t=0.0)

    def advance(self, u_new: np.ndarray, tau: float) -> "KinematicState":
        return KinematicState(
            u=np.asarray(u_new, dtype=float),
            u_prev=self.u,
            u_prev2=self.u_prev,
            t=self.t + tau,
        )

    def velocity(self, tau: float) -> np.ndarray:
        return (self.u - self.u_prev) / tau

    def acceleration(self, tau: float) -> np.ndarray:
        return (self.u - 2.0 * self.u_prev + self.u_prev2) / (tau * tau)

    def validate_dirichlet(self, mesh: Mesh2D, tol: float = 0.0) -> None:
        for name in ("u", "u_prev", "u_prev2"):
            vals = getattr(self, name)[mesh.dirichlet_dofs]
            if len(vals) and np.abs(vals).max() > tol:
                raise ValueError(f"{name} violates the Dirichlet conditions")


@dataclass
class SparseSPD:
    """Symmetric positive definite system on the free dofs.

    ``matrix`` is CSR with Dirichlet rows and columns removed; ``free``
    maps its rows back to global dof indices.
    """

    matrix: sp.csr_matrix
    free: np.ndarray
    n_total: int

    def __post_init__(self):
        asym = abs(self.matrix - self.matrix.T)
        scale = abs(self.matrix).max() or 1.0
        if asym.nnz and asym.max() > 1e-12 * scale:
            raise ValueError("assembled system is not symmetric")

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def embed(self, x_reduced: np.ndarray) -> np.ndarray:
        full = np.zeros(self.n_total)
        full[self.free] = x_reduced
        return full

    def restrict(self, x_full: np.ndarray) -> np.ndarray:
        return np.asarray(x_full)[self.free]


def solve_spd(A: SparseSPD, rhs: np.ndarray) -> np.ndarray:
    """Solve A x = rhs to relative residual <= 1e-10.

    Small systems go through a dense Cholesky factorization; larger
    ones through Jacobi-preconditioned conjugate gradients with an
    iteration cap.  Non-convergence raises, it is never papered over.
    """
    rhs = np.asarray(rhs, dtype=float)
    rhs_norm = float(np.linalg.norm(rhs))
    if rhs_norm == 0.0:
        return np.zeros_like(rhs)

    if A.n < DENSE_SOLVE_LIMIT:
        dense = A.matrix.toarray()
        try:
            chol = sla.cho_factor(dense, lower=True)
        except sla.LinAlgError as exc:
            raise SolverError(f"system is not positive definite: {exc}") from exc
        x = sla.cho_solve(chol, rhs)
    else:
        x = _pcg(A.matrix, rhs)

    residual = float(np.linalg.norm(A.matrix @ x - rhs)) / rhs_norm
    if residual > SOLVE_RTOL:
        raise SolverError(
            f"solver residual {residual:.3e} exceeds {SOLVE_RTOL:.1e}", residual
        )
    return x


def _pcg(A: sp.csr_matrix, rhs: np.ndarray) -> np.ndarray:
    diag = A.diagonal()
    if (diag <= 0.0).any():
        raise SolverError("nonpositive diagonal entry; system not SPD")
    inv_diag = 1.0 / diag
    x = np.zeros_like(rhs)
    r = rhs.copy()
    z = inv_diag * r
    p = z.copy()
    rz = float(r @ z)
    rhs_norm = float(np.linalg.norm(rhs))
    for _ in range(CG_MAX_ITER):
        Ap = A @ p
        alpha = rz / float(p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        if np.linalg.norm(r) <= CG_RTOL * rhs_norm:
            return x
        z = inv_diag * r
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    final = float(np.linalg.norm(A @ x - rhs)) / rhs_norm
    raise SolverError(
        f"PCG did not converge in {CG_MAX_ITER} iterations "
        f"(relative residual {final:.3e})",
        final,
    )


def assemble_step_system(
    mesh: Mesh2D,
    params: ModelParams,
    z: InterfaceField,
    tau: float,
    state: KinematicState,
    t_new: float,
    element_order: np.ndarray | None = None,
) -> tuple[SparseSPD, np.ndarray]:
    """One-shot assembly of the incremental system (see MomentumSolver
    for the cached variant used in the time loop)."""
    if tau <= 0.0:
        raise ValueError("time step must be positive")
    if len(mesh.dirichlet_dofs) == 0:
        raise SolverError("empty Dirichlet set: the incremental system is singular")
    mass = fem.mass_matrix(mesh, params.rho, element_order)
    stiff_d = fem.stiffness_matrix(mesh, params.viscous, element_order)
    stiff_c = fem.stiffness_matrix(mesh, params.elastic, element_order)
    load = assemble_load(mesh, params.load)
    return _build_system(
        mesh, params, z, tau, state, t_new, mass, stiff_d, stiff_c, load.value(t_new)
    )


def _build_system(mesh, params, z, tau, state, t_new, mass, stiff_d, stiff_c, f_new):
    weights = params.k * z.values.astype(float)
    K_z = fem.interface_matrix(mesh, weights)
    A_full = mass / (tau * tau) + stiff_d / tau + stiff_c + K_z
    rhs_full = (
        f_new
        + mass @ (2.0 * state.u - state.u_prev) / (tau * tau)
        + stiff_d @ state.u / tau
    )
    free = mesh.free_dofs
    A = SparseSPD(
        matrix=A_full[free][:, free].tocsr(), free=free, n_total=mesh.n_dofs
    )
    return A, rhs_full[free]


class MomentumSolver:
    """Time-loop solver with cached operators.

    ``element_order`` permutes element accumulation during assembly;
    two solvers with different permutations represent the same operator
    up to floating-point summation order.
    """

    def __init__(
        self,
        mesh: Mesh2D,
        params: ModelParams,
        element_order: np.ndarray | None = None,
    ):
        if len(mesh.dirichlet_dofs) == 0:
            raise SolverError("empty Dirichlet set: the incremental system is singular")
        self.mesh = mesh
        self.params = params
        self.mass = fem.mass_matrix(mesh, params.rho, element_order)
        self.stiff_viscous = fem.stiffness_matrix(mesh, params.viscous, element_order)
        self.stiff_elastic = fem.stiffness_matrix(mesh, params.elastic, element_order)
        self.load = assemble_load(mesh, params.load)

    def assemble(
        self, z: InterfaceField, tau: float, state: KinematicState, t_new: float
    ) -> tuple[SparseSPD, np.ndarray]:
        if tau <= 0.0:
            raise ValueError("time step must be positive")
        return _build_system(
            self.mesh,
            self.params,
            z,
            tau,
            state,
            t_new,
            self.mass,
            self.stiff_viscous,
            self.stiff_elastic,
            self.load.value(t_new),
        )

    def solve_step(
        self, z: InterfaceField, tau: float, state: KinematicState, t_new: float
    ) -> np.ndarray:
        """Solve for the new displacement; returns the full dof vector."""
        A, rhs = self.assemble(z, tau, state, t_new)
        return A.embed(solve_spd(A, rhs))

    def step_residual(
        self,
        z: InterfaceField,
        tau: float,
        state: KinematicState,
        t_new: float,
        u_new: np.ndarray,
    ) -> np.ndarray:
        """Weak-form residual vector (free dofs) of a candidate solution."""
        A, rhs = self.assemble(z, tau, state, t_new)
        return A.matrix @ A.restrict(u_new) - rhs


def incremental_functional(
    model: EnergyModel,
    z: InterfaceField,
    tau: float,
    state: KinematicState,
    t_new: float,
    u: np.ndarray,
) -> float:
    """The scalar functional minimized by the step (up to z-only terms).

    Evaluated through the energy module so that finite differences of
    this value cross-check the assembled gradient.
    """
    w = u - 2.0 * state.u + state.u_prev
    inertial = 0.5 * float(w @ (model.mass @ w)) / (tau * tau)
    visc = tau * model.viscous((u - state.u) / tau)
    return inertial + visc + model.stored(t_new, u, z)


def dump_matrix(A: SparseSPD, path) -> None:
    """MatrixMarket coordinate dump of the reduced system (debugging)."""
    from scipy.io import mmwrite

    mmwrite(str(path), A.matrix)


def recovery_lift(
    mesh: Mesh2D,
    v: np.ndarray,
    support_mask: np.ndarray,
    widen: int,
) -> np.ndarray:
    """Lift a field to one with no jump on a widened bonded set.

    Splits ``v`` into mirror-even and mirror-odd parts and damps the odd
    part by a nodewise cutoff that vanishes within distance
    ``widen * facet_length`` of the bonded set and ramps to one over the
    same distance again.  The result has zero interface jump on the
    widened set, and approaches ``v`` in the broken H1 norm as the
    widening shrinks.

    ``v`` must itself have (numerically) zero jump on the bonded set.
    """
    if mesh.mirror_map is None or len(mesh.mirror_map) != mesh.n_nodes:
        raise ValueError("mesh has no mirror map; recovery lift needs mirror symmetry")
    if widen < 1:
        raise ValueError("widen must be a positive facet count")
    support_mask = np.asarray(support_mask, dtype=bool)
    if support_mask.shape != (mesh.n_facets,):
        raise ValueError("support mask must have one entry per facet")

    norms = fem.facet_jump_norms(mesh, v)
    if support_mask.any() and norms[support_mask].max() > 1e-9:
        raise ValueError(
            "field jumps on the bonded set "
            f"(max facet jump norm {norms[support_mask].max():.3e})"
        )
    if not support_mask.any():
        return np.array(v, dtype=float, copy=True)

    v_sym, v_anti = sym_anti_split(mesh, v)
    intervals = [
        (f.x_left, f.x_right)
        for f, m in zip(mesh.interface_facets, support_mask)
        if m
    ]
    rho = widen * float(np.mean(mesh.facet_lengths()))

    xs = mesh.nodes[:, 0]
    ys = mesh.nodes[:, 1]
    d = np.full(mesh.n_nodes, np.inf)
    for x_left, x_right in intervals:
        dx = np.maximum(np.maximum(x_left - xs, xs - x_right), 0.0)
        d = np.minimum(d, np.hypot(dx, ys))
    xi = np.clip((d - rho) / rho, 0.0, 1.0)

    lifted = mesh.as_nodal(v_sym) + xi[:, None] * mesh.as_nodal(v_anti)
    return lifted.reshape(-1)
