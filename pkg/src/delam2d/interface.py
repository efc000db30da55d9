"""The delamination half of the alternating scheme.

At frozen displacement the update of the binary bonding field minimizes

    sum_i [ z_i * c1_i + (1 - z_i) * c0_i ] + b_k * (interior sign changes)

over fields that never re-bond (z <= z_prev componentwise).  On the 1D
facet chain with a jump-count perimeter this is a two-state chain
problem solved exactly by dynamic programming, so semistability of the
update is a machine-precision fact rather than a heuristic hope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fem
from .geometry import Mesh2D
from .materials import ModelParams, effective_coeffs

# Feasibility sentinel for forbidden states / infeasible updates.  It is
# only ever compared against or returned, never fed into arithmetic.
INFEASIBLE = math.inf


def is_infeasible(x: float) -> bool:
    return math.isinf(x)


@dataclass
class InterfaceField:
    """Binary bonding state per interface facet (1 = bonded, 0 = broken)."""

    values: np.ndarray
    lengths: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.int8)
        self.lengths = np.asarray(self.lengths, dtype=float)
        if self.values.shape != self.lengths.shape:
            raise ValueError("values and lengths must have matching shapes")
        if not np.isin(self.values, (0, 1)).all():
            raise ValueError("bonding values must be binary")

    @classmethod
    def fully_bonded(cls, mesh: Mesh2D) -> "InterfaceField":
        return cls(np.ones(mesh.n_facets, dtype=np.int8), mesh.facet_lengths())

    @classmethod
    def fully_debonded(cls, mesh: Mesh2D) -> "InterfaceField":
        return cls(np.zeros(mesh.n_facets, dtype=np.int8), mesh.facet_lengths())

    @classmethod
    def from_values(cls, mesh: Mesh2D, values) -> "InterfaceField":
        return cls(np.asarray(values, dtype=np.int8), mesh.facet_lengths())

    @property
    def n_facets(self) -> int:
        return len(self.values)

    def copy(self) -> "InterfaceField":
        return InterfaceField(self.values.copy(), self.lengths)

    def with_values(self, values) -> "InterfaceField":
        return InterfaceField(np.asarray(values, dtype=np.int8), self.lengths)

    def bonded_measure(self) -> float:
        return float(self.lengths[self.values == 1].sum())

    def debonded_measure(self) -> float:
        return float(self.lengths[self.values == 0].sum())

    def support_empty(self) -> bool:
        return not bool((self.values == 1).any())

    def __le__(self, other: "InterfaceField") -> bool:
        return bool((self.values <= other.values).all())


def perimeter_count(values: np.ndarray) -> int:
    """Interior sign changes of a binary chain (the relative perimeter).

    Endpoints of the interface contribute nothing: the perimeter is
    relative to the open contact segment.
    """
    values = np.asarray(values)
    if len(values) < 2:
        return 0
    return int(np.sum(values[1:] != values[:-1]))


@dataclass(frozen=True)
class FacetCosts:
    """Per-facet state costs of the bonding update at frozen displacement.

    ``c1`` is the cost of staying bonded (adhesive spring energy minus
    the stored surface energy), ``c0`` the cost of being broken (the
    debonding dissipation, paid only when leaving a bonded facet).
    Facets already broken are frozen: state 1 is structurally forbidden
    there, recorded in ``frozen_zero`` rather than as an infinite cost.
    """

    c0: np.ndarray
    c1: np.ndarray
    frozen_zero: np.ndarray


def facet_costs(
    mesh: Mesh2D,
    u: np.ndarray,
    z_prev: InterfaceField,
    params_eff: tuple[float, float, float, float],
) -> FacetCosts:
    """State costs from the current displacement field.

    ``params_eff`` is (a0_k, a1_k, b_k, k); b_k is unused here (it
    enters as the chain transition cost) but kept so callers pass one
    coefficient bundle around.
    """
    a0_k, a1_k, _, k = params_eff
    lengths = z_prev.lengths
    jump_sq = fem.facet_jump_sq_integrals(mesh, u)  # = lengths * g_i
    c1 = 0.5 * k * jump_sq - a0_k * lengths
    c0 = a1_k * lengths * z_prev.values
    frozen = z_prev.values == 0
    return FacetCosts(c0=c0, c1=c1, frozen_zero=frozen)


def minimize_z_dp(
    costs: FacetCosts, b_k: float, frozen_zero: np.ndarray | None = None
) -> np.ndarray:
    """Exact global minimizer of the chain functional.

    Backward dynamic program over the facet chain followed by a greedy
    forward pass that, among all optimal chains, selects the one that
    keeps the most bonding (lexicographically, which on the lattice of
    minimizers is the componentwise-maximal one).
    """
    frozen = costs.frozen_zero if frozen_zero is None else np.asarray(frozen_zero)
    c0, c1 = costs.c0, costs.c1
    n = len(c0)
    if n == 0:
        return np.zeros(0, dtype=np.int8)

    # g[i][s]: minimal cost of the suffix z_i .. z_{n-1} given z_i = s.
    g0 = np.empty(n)
    g1 = np.empty(n)
    g0[n - 1] = c0[n - 1]
    g1[n - 1] = INFEASIBLE if frozen[n - 1] else c1[n - 1]
    for i in range(n - 2, -1, -1):
        best_from_0 = g0[i + 1]
        best_from_1 = g1[i + 1]
        # suffix cost after state 0 / state 1 at facet i
        if is_infeasible(best_from_1):
            after0 = best_from_0
            after1 = best_from_0 + b_k
        else:
            after0 = min(best_from_0, best_from_1 + b_k)
            after1 = min(best_from_0 + b_k, best_from_1)
        g0[i] = c0[i] + after0
        g1[i] = INFEASIBLE if frozen[i] else c1[i] + after1

    z = np.zeros(n, dtype=np.int8)
    prev_state = None
    for i in range(n):
        if is_infeasible(g1[i]):
            choice = 0
        else:
            trans0 = 0.0 if (prev_state is None or prev_state == 0) else b_k
            trans1 = 0.0 if (prev_state is None or prev_state == 1) else b_k
            # tie-break toward keeping the bond
            choice = 1 if g1[i] + trans1 <= g0[i] + trans0 else 0
        z[i] = choice
        prev_state = choice
    return z


def chain_value(
    values: np.ndarray, costs: FacetCosts, b_k: float
) -> float:
    """Objective value of a binary chain; INFEASIBLE if it re-bonds."""
    values = np.asarray(values)
    if (values.astype(bool) & costs.frozen_zero).any():
        return INFEASIBLE
    state_cost = float(np.where(values == 1, costs.c1, costs.c0).sum())
    return state_cost + b_k * perimeter_count(values)


def default_semistab_tol(
    lengths: np.ndarray, a0_k: float, a1_k: float
) -> float:
    scale = float(lengths.sum()) * (a0_k + a1_k)
    if scale <= 0.0:
        scale = 1.0
    return 1e-10 * scale


@dataclass(frozen=True)
class CertifyResult:
    """Outcome of the one-sided stability test at frozen displacement.

    ``worst_violation`` is the signed margin
    min over competitors of [ E(z~) + R(z~ - z) ] - E(z); nonnegative
    (up to tolerance) means the state is semistable.
    ``perimeter_margin`` is the worst signed margin of the companion
    perimeter-vs-volume inequality over the competitors "empty set" and
    "drop one bonded facet".
    """

    ok: bool
    worst_violation: float
    perimeter_margin: float

    def __iter__(self):
        return iter((self.ok, self.worst_violation))


def certify_semistability(
    mesh: Mesh2D,
    t: float,
    u: np.ndarray,
    z: InterfaceField,
    params: ModelParams,
    tol: float | None = None,
) -> CertifyResult:
    """Certify that no admissible debonding lowers energy plus dissipation.

    Runs one exact chain minimization with the current state as the
    reference; the optimal value can only undercut the current value by
    at most the returned margin.  Competitors are binary fields below
    the current one; with the perimeter term active these are exhaustive.
    """
    a0_k, a1_k, b_k = effective_coeffs(params)
    params_eff = (a0_k, a1_k, b_k, params.k)
    costs = facet_costs(mesh, u, z, params_eff)
    z_opt = minimize_z_dp(costs, b_k)
    val_opt = chain_value(z_opt, costs, b_k)
    val_cur = chain_value(z.values, costs, b_k)
    margin = val_opt - val_cur

    if tol is None:
        tol = default_semistab_tol(z.lengths, a0_k, a1_k)

    perimeter_margin = _perimeter_inequality_margin(z, a0_k, a1_k, b_k)
    return CertifyResult(
        ok=margin >= -tol,
        worst_violation=float(margin),
        perimeter_margin=float(perimeter_margin),
    )


def _perimeter_inequality_margin(
    z: InterfaceField, a0_k: float, a1_k: float, b_k: float
) -> float:
    """Worst margin of  b_k P(Z~) + (a0_k + a1_k) |Z / Z~| - b_k P(Z).

    Competitors: the empty set, and the current bonded set with each
    single bonded facet removed.
    """
    base_p = perimeter_count(z.values)
    # empty competitor: P(empty) = 0, removed measure = |Z|
    worst = (a0_k + a1_k) * z.bonded_measure() - b_k * base_p
    for i in np.flatnonzero(z.values == 1):
        trial = z.values.copy()
        trial[i] = 0
        margin = (
            b_k * perimeter_count(trial)
            + (a0_k + a1_k) * z.lengths[i]
            - b_k * base_p
        )
        worst = min(worst, margin)
    return worst
