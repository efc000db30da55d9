"""Adhesive-to-brittle sweep: run identical scenarios at increasing
adhesive stiffness and measure how the runs approach the stiff limit.

The exact limit evolution is not computable, so every diagnostic is
Cauchy-style: distances to the stiffest member (the reference) and gaps
between consecutive members.  Comparisons at sample times that fall
near a debonding event of any member are flagged and excluded, since
the event time itself may shift by a step across stiffnesses.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .energies import EnergyModel, energy_lower_bound
from .evolution import Trajectory
from .geometry import Mesh2D
from .interface import INFEASIBLE, InterfaceField, is_infeasible
from .materials import ModelParams, effective_coeffs
from .momentum import SolverError


@dataclass
class Scenario:
    """Everything a sweep member needs except the adhesive stiffness."""

    name: str
    mesh: Mesh2D
    params: ModelParams
    tau: float
    n_steps: int
    u0: np.ndarray
    u1: np.ndarray
    z0: InterfaceField

    def run(self, k: float, **kwargs) -> Trajectory:
        traj = Trajectory(
            mesh=self.mesh,
            params=self.params.with_k(k),
            tau=self.tau,
            u0=self.u0,
            u1=self.u1,
            z0=self.z0.copy(),
            **kwargs,
        )
        return traj.run(self.n_steps)


def support_distance(z_a: InterfaceField, z_b: InterfaceField) -> float:
    """One-sided distance of the first bonded set to the second.

    Measured along the facet chain between facet midpoints; zero when
    the first support is contained in (or equal to) the second, and the
    INFEASIBLE sentinel when the first has support but the second none.
    """
    if z_a.n_facets != z_b.n_facets or not np.array_equal(z_a.lengths, z_b.lengths):
        raise ValueError("bonding fields live on different facet chains")
    a_idx = np.flatnonzero(z_a.values == 1)
    if len(a_idx) == 0:
        return 0.0
    b_idx = np.flatnonzero(z_b.values == 1)
    if len(b_idx) == 0:
        return INFEASIBLE
    # facet midpoints along the chain
    right = np.cumsum(z_a.lengths)
    mids = right - 0.5 * z_a.lengths
    dist = np.abs(mids[a_idx][:, None] - mids[b_idx][None, :]).min(axis=1)
    return float(dist.max())


def brittle_residuals(
    traj: Trajectory, sample_indices: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Adhesive penalization and stiff-limit constraint residual in time.

    Returns per sample the spring energy J_k and the largest facet L2
    jump norm on the bonded set (which must vanish in the stiff limit).
    """
    if sample_indices is None:
        sample_indices = np.arange(traj.n_steps + 1)
    J = np.empty(len(sample_indices))
    sup_jump = np.empty(len(sample_indices))
    for out, idx in enumerate(sample_indices):
        u = traj.displacement(int(idx))
        z = traj.zs[int(idx)]
        J[out] = traj.model.adhesive(u, z)
        sup_jump[out] = traj.model.max_jump_on_support(u, z)
    return J, sup_jump


@dataclass
class MemberSeries:
    """Per-stiffness time series at the sample times."""

    k: float
    adhesive: list[float]
    energy: list[float]
    var_ri: list[float]
    max_jump_on_support: list[float]
    rho_to_ref: list[float]
    support: list[list[int]]
    surface_coeff_times_debonded: float
    sup_adhesive: float
    adhesive_bound: float


@dataclass
class SweepReport:
    """All sweep diagnostics, serializable as JSON plus flat CSV tables."""

    scenario: str
    k_values: list[float]
    sample_steps: list[int]
    sample_times: list[float]
    excluded: list[bool]
    facet_length: float
    members: list[MemberSeries] = field(default_factory=list)
    failed_k: float | None = None
    failure: str = ""

    @property
    def ok(self) -> bool:
        return self.failed_k is None

    def member(self, k: float) -> MemberSeries:
        for m in self.members:
            if m.k == k:
                return m
        raise KeyError(f"no sweep member with k={k}")

    # -- diagnostics -------------------------------------------------------

    def check_adhesive_bounded(self) -> bool:
        """sup_t J_k stays below the certified uniform energy bound."""
        return all(m.sup_adhesive <= m.adhesive_bound for m in self.members)

    def check_jump_decay(self, rel_tol: float = 1e-3) -> bool:
        """sup_t of the bonded-set jump norm decays along the sweep."""
        series = [max(m.max_jump_on_support) for m in self.members]
        scale = max(series + [1e-30])
        return all(b <= a + rel_tol * scale for a, b in zip(series, series[1:]))

    def check_rho_monotone(self) -> bool:
        """Support distance to the reference shrinks with stiffness,
        within one facet length, at every non-excluded sample time."""
        for s, skip in enumerate(self.excluded):
            if skip:
                continue
            rhos = [m.rho_to_ref[s] for m in self.members]
            if any(is_infeasible(r) for r in rhos):
                return False
            for a, b in zip(rhos, rhos[1:]):
                if b > a + self.facet_length:
                    return False
        return True

    def consecutive_gaps(self, attr: str) -> list[float]:
        """Max gap over non-excluded samples between consecutive members."""
        gaps = []
        for m_a, m_b in zip(self.members, self.members[1:]):
            series_a, series_b = getattr(m_a, attr), getattr(m_b, attr)
            worst = 0.0
            for s, skip in enumerate(self.excluded):
                if not skip:
                    worst = max(worst, abs(series_b[s] - series_a[s]))
            gaps.append(worst)
        return gaps

    def check_cauchy(self, attr: str, slack: float = 1e-12) -> bool:
        gaps = self.consecutive_gaps(attr)
        scale = max(gaps + [1e-30])
        return all(b <= a + slack * scale for a, b in zip(gaps, gaps[1:]))

    def all_checks(self) -> dict[str, bool]:
        return {
            "adhesive_bounded": self.check_adhesive_bounded(),
            "jump_decay": self.check_jump_decay(),
            "rho_monotone": self.check_rho_monotone(),
            "cauchy_energy": self.check_cauchy("energy"),
            "cauchy_var_ri": self.check_cauchy("var_ri"),
        }

    # -- serialization ---------------------------------------------------------

    def to_json(self) -> str:
        def enc(x):
            return "inf" if isinstance(x, float) and is_infeasible(x) else x

        payload = {
            "scenario": self.scenario,
            "k_values": self.k_values,
            "sample_steps": self.sample_steps,
            "sample_times": self.sample_times,
            "excluded": self.excluded,
            "facet_length": self.facet_length,
            "failed_k": self.failed_k,
            "failure": self.failure,
            "checks": self.all_checks() if self.ok else {},
            "members": [
                {
                    "k": m.k,
                    "adhesive": [enc(v) for v in m.adhesive],
                    "energy": m.energy,
                    "var_ri": m.var_ri,
                    "max_jump_on_support": m.max_jump_on_support,
                    "rho_to_ref": [enc(v) for v in m.rho_to_ref],
                    "support": m.support,
                    "surface_coeff_times_debonded": m.surface_coeff_times_debonded,
                    "sup_adhesive": m.sup_adhesive,
                    "adhesive_bound": m.adhesive_bound,
                }
                for m in self.members
            ],
        }
        return json.dumps(payload, sort_keys=True, indent=1)

    def write_json(self, path) -> None:
        with open(path, "w", newline="\n") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    def write_csv_tables(self, directory) -> list[str]:
        """One table per metric: rows are sample times, columns members."""
        from pathlib import Path

        directory = Path(directory)
        written = []
        metrics = ("adhesive", "energy", "var_ri", "max_jump_on_support", "rho_to_ref")
        for metric in metrics:
            path = directory / f"sweep_{metric}.csv"
            header = "t,excluded," + ",".join(f"k={m.k:.17g}" for m in self.members)
            lines = [header]
            for s, t in enumerate(self.sample_times):
                cells = [format(t, ".17g"), str(int(self.excluded[s]))]
                for m in self.members:
                    cells.append(format(getattr(m, metric)[s], ".17g"))
                lines.append(",".join(cells))
            with open(path, "w", newline="\n") as fh:
                fh.write("\n".join(lines) + "\n")
            written.append(str(path))
        return written


def run_sweep(
    scenario: Scenario,
    k_values,
    n_samples: int = 10,
    exclusion_steps: int = 2,
    **run_kwargs,
) -> SweepReport:
    """Run one trajectory per stiffness on identical data and reduce.

    The stiffest member serves as the reference for support distances.
    A member failure aborts the sweep; the partial report is returned
    with the failure flagged.
    """
    k_values = [float(k) for k in k_values]
    if any(b <= a for a, b in zip(k_values, k_values[1:])):
        raise ValueError("k_values must be strictly increasing")
    mesh = scenario.mesh
    n_steps = scenario.n_steps
    sample_steps = sorted(
        set(int(round(s)) for s in np.linspace(0, n_steps, n_samples))
    )
    sample_times = [s * scenario.tau for s in sample_steps]
    facet_length = float(np.mean(mesh.facet_lengths()))

    report = SweepReport(
        scenario=scenario.name,
        k_values=k_values,
        sample_steps=sample_steps,
        sample_times=sample_times,
        excluded=[False] * len(sample_steps),
        facet_length=facet_length,
    )

    trajectories: list[Trajectory] = []
    for k in k_values:
        try:
            trajectories.append(scenario.run(k, **run_kwargs))
        except (SolverError, ValueError) as exc:
            report.failed_k = k
            report.failure = str(exc)
            return report

    # exclusion windows around any member's debonding instants
    jump_steps: set[int] = set()
    for traj in trajectories:
        for n in range(1, traj.n_steps + 1):
            if not np.array_equal(traj.zs[n].values, traj.zs[n - 1].values):
                jump_steps.add(n)
    report.excluded = [
        any(abs(s - j) <= exclusion_steps for j in jump_steps) for s in sample_steps
    ]

    lam_min = None
    reference = trajectories[-1]
    for traj in trajectories:
        model: EnergyModel = traj.model
        # certified lower bound of the spring-free energy, worst over time
        lower = 0.0
        for t in sample_times:
            bt, lam_min = energy_lower_bound(model, t, lam_min)
            lower = min(lower, bt)
        adhesive, energy, var_ri, max_jump, rho, support = [], [], [], [], [], []
        var_running = 0.0
        sup_energy = -np.inf
        sup_adhesive = 0.0
        next_sample = 0
        for n in range(traj.n_steps + 1):
            var_running += traj.ledger.rows[n].ri_increment
            u = traj.displacement(n)
            z = traj.zs[n]
            J_n = model.adhesive(u, z)
            E_n = model.stored(traj.times[n], u, z)
            sup_adhesive = max(sup_adhesive, J_n)
            sup_energy = max(sup_energy, E_n)
            if next_sample < len(sample_steps) and n == sample_steps[next_sample]:
                adhesive.append(J_n)
                energy.append(E_n)
                var_ri.append(var_running)
                max_jump.append(model.max_jump_on_support(u, z))
                rho.append(support_distance(z, reference.zs[n]))
                support.append([int(v) for v in z.values])
                next_sample += 1
        # J_k <= E_k - (certified lower bound of the spring-free remainder)
        bound = sup_energy - lower
        a0_k, a1_k, b_k = effective_coeffs(traj.params)
        report.members.append(
            MemberSeries(
                k=traj.params.k,
                adhesive=adhesive,
                energy=energy,
                var_ri=var_ri,
                max_jump_on_support=max_jump,
                rho_to_ref=rho,
                support=support,
                surface_coeff_times_debonded=(a0_k + a1_k + b_k)
                * traj.zs[-1].debonded_measure(),
                sup_adhesive=sup_adhesive,
                adhesive_bound=bound,
            )
        )
    return report
