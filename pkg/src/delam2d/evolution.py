"""Time stepping: alternating displacement and bonding updates.

Each step first solves the implicit visco-elastodynamic system at the
bonding state of the previous step, then lets the bonding relax by an
exact chain minimization at the new displacement (the order can be
flipped for sensitivity studies).  Every step appends an audited row to
the energy ledger; the discrete energy-dissipation inequality can be
checked a posteriori between any two step indices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .energies import EnergyLedger, EnergyModel, LedgerRow
from .geometry import Mesh2D
from .interface import (
    CertifyResult,
    InterfaceField,
    certify_semistability,
    facet_costs,
    minimize_z_dp,
    perimeter_count,
)
from .materials import ModelParams, effective_coeffs
from .momentum import KinematicState, MomentumSolver

CHECKPOINT_FORMAT = "delam2d-checkpoint-v1"
TRAJECTORY_FORMAT = "delam2d-trajectory-v1"


class InitError(ValueError):
    """Ill-prepared initial data in strict mode."""


@dataclass
class AuditResult:
    lhs: float
    rhs: float

    @property
    def residual(self) -> float:
        return self.lhs - self.rhs

    def __iter__(self):
        return iter((self.lhs, self.rhs, self.residual))


class Trajectory:
    """A discrete evolution with full history and an energy ledger."""

    def __init__(
        self,
        mesh: Mesh2D,
        params: ModelParams,
        tau: float,
        u0: np.ndarray,
        u1: np.ndarray,
        z0: InterfaceField,
        strict_init: bool = True,
        step_order: str = "uz",
        store_history: bool = True,
        element_order: np.ndarray | None = None,
    ):
        if tau <= 0.0:
            raise ValueError("time step must be positive")
        if step_order not in ("uz", "zu"):
            raise ValueError(f"step order must be 'uz' or 'zu', got {step_order!r}")
        self.mesh = mesh
        self.params = params
        self.tau = float(tau)
        self.step_order = step_order
        self.store_history = store_history
        self.model = EnergyModel(mesh, params)
        self.solver = MomentumSolver(mesh, params, element_order)

        u0 = np.asarray(u0, dtype=float)
        u1 = np.asarray(u1, dtype=float)
        state = KinematicState.initial(u0, u1, self.tau)
        state.validate_dirichlet(mesh)

        cert = certify_semistability(mesh, 0.0, u0, z0, params)
        if not cert.ok:
            if strict_init:
                raise InitError(
                    "initial bonding state is not semistable "
                    f"(violation {cert.worst_violation:.3e}); "
                    "use repair mode to project it"
                )
            z0 = self._relax_bonding(0.0, u0, z0)

        self.state = state
        self.z = z0
        self.times: list[float] = [0.0]
        self.us: list[np.ndarray] = [u0.copy()] if store_history else []
        self.zs: list[InterfaceField] = [z0.copy()]
        self._v0 = u1.copy()
        self._power_integral = 0.0
        self.ledger = EnergyLedger()
        self._append_ledger_row(0.0, u1, z0, z0, u0)

    # -- stepping -----------------------------------------------------------

    @property
    def t(self) -> float:
        return self.state.t

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1

    def _relax_bonding(
        self, t: float, u: np.ndarray, z_prev: InterfaceField
    ) -> InterfaceField:
        a0_k, a1_k, b_k = effective_coeffs(self.params)
        costs = facet_costs(
            self.mesh, u, z_prev, (a0_k, a1_k, b_k, self.params.k)
        )
        return z_prev.with_values(minimize_z_dp(costs, b_k))

    def step(self) -> "Trajectory":
        """Advance by one time step (displacement solve, bonding update)."""
        t_new = self.state.t + self.tau
        z_prev = self.z

        if self.step_order == "uz":
            u_new = self.solver.solve_step(z_prev, self.tau, self.state, t_new)
            z_new = self._relax_bonding(t_new, u_new, z_prev)
        else:
            z_new = self._relax_bonding(t_new, self.state.u, z_prev)
            u_new = self.solver.solve_step(z_new, self.tau, self.state, t_new)

        if (z_new.values > z_prev.values).any():
            raise AssertionError("bonding update violated unidirectionality")

        self.state = self.state.advance(u_new, self.tau)
        self.z = z_new
        self.times.append(t_new)
        if self.store_history:
            self.us.append(u_new.copy())
        self.zs.append(z_new.copy())

        v_new = self.state.velocity(self.tau)
        self._append_ledger_row(t_new, v_new, z_new, z_prev, u_new)
        return self

    def run(self, n_steps: int) -> "Trajectory":
        for _ in range(n_steps):
            self.step()
        return self

    def _append_ledger_row(
        self,
        t: float,
        velocity: np.ndarray,
        z: InterfaceField,
        z_prev: InterfaceField,
        u: np.ndarray,
    ) -> None:
        model = self.model
        is_initial = len(self.ledger) == 0
        viscous_inc = 0.0 if is_initial else 2.0 * self.tau * model.viscous(velocity)
        ri_inc = 0.0 if is_initial else model.ri_dissipation(z, z_prev)
        if not is_initial:
            self._power_integral += self.tau * model.power(t, u)
        self.ledger.append(
            LedgerRow(
                t=t,
                kinetic=model.kinetic(velocity),
                viscous_increment=viscous_inc,
                ri_increment=ri_inc,
                stored_bulk=model.bulk_elastic(u),
                load_potential=model.load_potential(t, u),
                adhesive=model.adhesive(u, z),
                surface_linear=model.surface_linear(z),
                perimeter_term=model.perimeter_term(z),
                power_integral=self._power_integral,
            )
        )

    # -- history access -------------------------------------------------------

    def displacement(self, idx: int) -> np.ndarray:
        if not self.store_history:
            raise ValueError("trajectory ran in streaming mode; history not stored")
        return self.us[idx]

    def velocity(self, idx: int) -> np.ndarray:
        if idx == 0:
            return self._v0
        return (self.displacement(idx) - self.displacement(idx - 1)) / self.tau

    def certify_step(self, idx: int) -> CertifyResult:
        return certify_semistability(
            self.mesh, self.times[idx], self.displacement(idx), self.zs[idx], self.params
        )

    # -- auditing ---------------------------------------------------------------

    def audit_energy(self, s_index: int, t_index: int) -> AuditResult:
        """Discrete energy-dissipation inequality between two step indices.

        lhs collects kinetic + accumulated viscous and rate-independent
        dissipation + stored energy at the later time; rhs is the value
        at the earlier time plus the accumulated external power (right
        endpoint rule).  The scheme guarantees lhs <= rhs + O(tau).
        """
        if not 0 <= s_index <= t_index <= self.n_steps:
            raise IndexError("need 0 <= s_index <= t_index <= number of steps")
        model = self.model
        lhs = model.kinetic(self.velocity(t_index)) + model.stored(
            self.times[t_index], self.displacement(t_index), self.zs[t_index]
        )
        for m in range(s_index + 1, t_index + 1):
            lhs += 2.0 * self.tau * model.viscous(self.velocity(m))
            lhs += model.ri_dissipation(self.zs[m], self.zs[m - 1])
        rhs = model.kinetic(self.velocity(s_index)) + model.stored(
            self.times[s_index], self.displacement(s_index), self.zs[s_index]
        )
        for m in range(s_index + 1, t_index + 1):
            rhs += self.tau * model.power(self.times[m], self.displacement(m))
        return AuditResult(lhs=lhs, rhs=rhs)

    def audit_profile(self) -> np.ndarray:
        """Cumulative audit values G(n); residual(s, t) = G(t) - G(s).

        G(n) is kinetic + stored at step n, plus accumulated viscous and
        rate-independent dissipation, minus the accumulated power.  The
        inequality lhs <= rhs + tol over all step pairs is equivalent to
        max over pairs of G(t) - G(s) <= tol.
        """
        model = self.model
        G = np.empty(self.n_steps + 1)
        acc = 0.0
        for n in range(self.n_steps + 1):
            if n > 0:
                acc += 2.0 * self.tau * model.viscous(self.velocity(n))
                acc += model.ri_dissipation(self.zs[n], self.zs[n - 1])
                acc -= self.tau * model.power(self.times[n], self.displacement(n))
            G[n] = (
                model.kinetic(self.velocity(n))
                + model.stored(self.times[n], self.displacement(n), self.zs[n])
                + acc
            )
        return G

    def max_pair_residuals(self) -> tuple[float, float]:
        """(max positive residual, max |residual|) over ALL step pairs."""
        G = self.audit_profile()
        run_min = np.minimum.accumulate(G)
        run_max = np.maximum.accumulate(G)
        max_pos = float(np.max(G - run_min))
        max_abs = max(max_pos, float(np.max(run_max - G)))
        return max_pos, max_abs

    def max_audit_residual(self) -> float:
        """Largest |lhs - rhs| over all step pairs."""
        return self.max_pair_residuals()[1]

    def uniform_bounds(self) -> dict:
        """Trajectory-wide bounds mirroring the a priori estimates."""
        model = self.model
        energies = [
            model.stored(self.times[n], self.displacement(n), self.zs[n])
            for n in range(self.n_steps + 1)
        ]
        a0_k, a1_k, b_k = effective_coeffs(self.params)
        perims = [perimeter_count(z.values) for z in self.zs]
        return {
            "sup_energy": max(energies),
            "sum_viscous_increments": sum(r.viscous_increment for r in self.ledger.rows),
            "sup_perimeter": max(perims),
            "sup_z_inf": max(int(z.values.max(initial=0)) for z in self.zs),
            "var_ri_total": sum(r.ri_increment for r in self.ledger.rows),
            "perimeter_bound_ok": all(
                b_k * p <= (a0_k + a1_k) * z.bonded_measure() + 1e-12
                for p, z in zip(perims, self.zs)
            ),
        }


# -- persistence ------------------------------------------------------------


def save_checkpoint(path, state: KinematicState, z: InterfaceField) -> None:
    """Single-state restart file (displacement pair, bonding, time)."""
    payload = {
        "format": CHECKPOINT_FORMAT,
        "t": state.t,
        "u": state.u.tolist(),
        "u_prev": state.u_prev.tolist(),
        "z": state_z_list(z),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True)


def state_z_list(z: InterfaceField) -> list[int]:
    return [int(v) for v in z.values]


def load_checkpoint(path, mesh: Mesh2D, tau: float) -> tuple[KinematicState, InterfaceField]:
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"unsupported checkpoint format {payload.get('format')!r}")
    u = np.asarray(payload["u"], dtype=float)
    u_prev = np.asarray(payload["u_prev"], dtype=float)
    state = KinematicState(u=u, u_prev=u_prev, u_prev2=u_prev.copy(), t=payload["t"])
    z = InterfaceField.from_values(mesh, payload["z"])
    return state, z


def save_trajectory(path, traj: Trajectory, meta: dict | None = None) -> None:
    """Full-history dump used by the offline audit."""
    if not traj.store_history:
        raise ValueError("cannot dump a streaming trajectory; save a checkpoint")
    payload = {
        "format": TRAJECTORY_FORMAT,
        "tau": traj.tau,
        "times": traj.times,
        "u": [u.tolist() for u in traj.us],
        "z": [state_z_list(z) for z in traj.zs],
        "v0": traj._v0.tolist(),
        "meta": meta or {},
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True)


def load_trajectory_payload(path) -> dict:
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("format") != TRAJECTORY_FORMAT:
        raise ValueError(f"unsupported trajectory format {payload.get('format')!r}")
    return payload
