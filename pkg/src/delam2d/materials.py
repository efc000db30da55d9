"""Material tensors, interface coefficients and time-dependent loading.

Both the elastic and the viscous response are isotropic plane-strain
tensors given by Lamé moduli.  The interface carries three coefficients
(stored energy of the adhesive, dissipated energy of debonding, and the
perimeter weight) plus the adhesive stiffness ``k``; the two supported
scalings keep them constant in ``k`` or divide all three by ``k``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import EDGE_TAGS, Mesh2D


class MaterialError(ValueError):
    """Non-coercive moduli or ill-formed load specification."""


class ScalingMode(enum.Enum):
    """How the interface coefficients depend on the adhesive stiffness."""

    CONSTANT = "constant"
    ONE_OVER_K = "one_over_k"

    @classmethod
    def parse(cls, text: str) -> "ScalingMode":
        for mode in cls:
            if mode.value == text:
                return mode
        raise MaterialError(f"unknown scaling mode {text!r}")


@dataclass(frozen=True)
class IsotropicTensor:
    """Fourth-order isotropic tensor eta -> lam*tr(eta)*I + 2*mu*eta."""

    lam: float
    mu: float

    def __post_init__(self):
        if not (self.mu > 0.0 and self.lam + self.mu > 0.0):
            raise MaterialError(
                f"moduli (lambda={self.lam}, mu={self.mu}) are not coercive: "
                "need mu > 0 and lambda + mu > 0"
            )

    def apply(self, eta: np.ndarray) -> np.ndarray:
        eta = np.asarray(eta, dtype=float)
        return self.lam * np.trace(eta) * np.eye(2) + 2.0 * self.mu * eta

    def contract(self, eta: np.ndarray) -> float:
        """The quadratic form eta : C eta."""
        return float(np.tensordot(eta, self.apply(eta)))

    def voigt(self) -> np.ndarray:
        """3x3 matrix acting on strains ordered (e11, e22, 2*e12)."""
        lam, mu = self.lam, self.mu
        return np.array(
            [
                [lam + 2.0 * mu, lam, 0.0],
                [lam, lam + 2.0 * mu, 0.0],
                [0.0, 0.0, mu],
            ]
        )

    def bounds(self) -> tuple[float, float]:
        """Exact coercivity bracket: cmin*|eta|^2 <= eta:C eta <= cmax*|eta|^2.

        On 2x2 symmetric matrices the eigenvalues of the tensor are
        2*mu (traceless part) and 2*mu + 2*lam (spherical part).
        """
        lo = 2.0 * self.mu + 2.0 * min(self.lam, 0.0)
        hi = 2.0 * self.mu + 2.0 * max(self.lam, 0.0)
        return lo, hi


def isotropic_tensor(lam: float, mu: float) -> IsotropicTensor:
    """Validated isotropic tensor from Lamé moduli."""
    return IsotropicTensor(lam=lam, mu=mu)


@dataclass(frozen=True)
class TimeProfile:
    """Scalar time dependence with a closed-form derivative.

    Kinds: ``constant`` (value ``scale``), ``ramp`` (``scale * t``) and
    ``sine`` (``scale * sin(omega t + phase)``).
    """

    kind: str = "constant"
    scale: float = 1.0
    omega: float = 1.0
    phase: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "ramp", "sine"):
            raise MaterialError(f"unknown time profile kind {self.kind!r}")

    def value(self, t: float) -> float:
        if self.kind == "constant":
            return self.scale
        if self.kind == "ramp":
            return self.scale * t
        return self.scale * math.sin(self.omega * t + self.phase)

    def derivative(self, t: float) -> float:
        if self.kind == "constant":
            return 0.0
        if self.kind == "ramp":
            return self.scale
        return self.scale * self.omega * math.cos(self.omega * t + self.phase)


_REGIONS = ("body_plus", "body_minus") + EDGE_TAGS


@dataclass(frozen=True)
class LoadComponent:
    """A constant spatial pattern times a scalar time profile.

    ``region`` is either one of the block body tags (force density per
    unit area) or a boundary edge tag (traction per unit length).
    """

    region: str
    direction: tuple[float, float]
    profile: TimeProfile = field(default_factory=TimeProfile)

    def __post_init__(self):
        if self.region not in _REGIONS:
            raise MaterialError(f"unknown load region {self.region!r}")


@dataclass(frozen=True)
class LoadSchedule:
    """The full external loading: a sum of load components."""

    components: tuple[LoadComponent, ...] = ()

    @classmethod
    def none(cls) -> "LoadSchedule":
        return cls(components=())


@dataclass(frozen=True)
class ModelParams:
    """All physical parameters of the model (dimensionless units)."""

    rho: float
    lame_lambda_C: float
    lame_mu_C: float
    lame_lambda_D: float
    lame_mu_D: float
    a0: float
    a1: float
    b: float
    k: float
    scaling: ScalingMode = ScalingMode.CONSTANT
    load: LoadSchedule = field(default_factory=LoadSchedule.none)

    def __post_init__(self):
        if self.rho <= 0.0:
            raise MaterialError(f"mass density must be positive, got {self.rho}")
        if self.k <= 0.0:
            raise MaterialError(f"adhesive stiffness must be positive, got {self.k}")
        if min(self.a0, self.a1, self.b) < 0.0:
            raise MaterialError("interface coefficients a0, a1, b must be >= 0")
        # validate coercivity of both tensors eagerly
        isotropic_tensor(self.lame_lambda_C, self.lame_mu_C)
        isotropic_tensor(self.lame_lambda_D, self.lame_mu_D)

    @property
    def elastic(self) -> IsotropicTensor:
        return isotropic_tensor(self.lame_lambda_C, self.lame_mu_C)

    @property
    def viscous(self) -> IsotropicTensor:
        return isotropic_tensor(self.lame_lambda_D, self.lame_mu_D)

    def with_k(self, k: float) -> "ModelParams":
        return replace(self, k=k)


def effective_coeffs(params: ModelParams) -> tuple[float, float, float]:
    """Interface coefficients (a0_k, a1_k, b_k) for the given scaling."""
    if params.scaling is ScalingMode.CONSTANT:
        return params.a0, params.a1, params.b
    return params.a0 / params.k, params.a1 / params.k, params.b / params.k


def brittle_coeffs(params: ModelParams) -> tuple[float, float, float]:
    """Interface coefficients of the limit model.

    Constant scaling keeps (a0, a1, b); the 1/k scaling sends all three
    surface coefficients to zero in the limit.
    """
    if params.scaling is ScalingMode.CONSTANT:
        return params.a0, params.a1, params.b
    return 0.0, 0.0, 0.0


class AssembledLoad:
    """The load functional assembled against P1 shape functions.

    Each component contributes ``profile(t) * base`` where ``base`` is a
    time-independent dof vector; the time derivative is therefore exact.
    """

    def __init__(self, mesh: Mesh2D, schedule: LoadSchedule):
        self.mesh = mesh
        self._bases: list[np.ndarray] = []
        self._profiles: list[TimeProfile] = []
        for comp in schedule.components:
            self._bases.append(_assemble_pattern(mesh, comp))
            self._profiles.append(comp.profile)

    def value(self, t: float) -> np.ndarray:
        f = np.zeros(self.mesh.n_dofs)
        for base, prof in zip(self._bases, self._profiles):
            f += prof.value(t) * base
        return f

    def derivative(self, t: float) -> np.ndarray:
        df = np.zeros(self.mesh.n_dofs)
        for base, prof in zip(self._bases, self._profiles):
            df += prof.derivative(t) * base
        return df

    def is_zero(self) -> bool:
        return not self._bases


def _assemble_pattern(mesh: Mesh2D, comp: LoadComponent) -> np.ndarray:
    base = np.zeros(mesh.n_dofs)
    direction = np.asarray(comp.direction, dtype=float)
    if comp.region in ("body_plus", "body_minus"):
        want_plus = comp.region == "body_plus"
        for tri in mesh.triangles:
            coords = mesh.nodes[tri]
            centroid_y = coords[:, 1].mean()
            if (centroid_y > 0.0) != want_plus:
                continue
            area = 0.5 * abs(
                (coords[1, 0] - coords[0, 0]) * (coords[2, 1] - coords[0, 1])
                - (coords[2, 0] - coords[0, 0]) * (coords[1, 1] - coords[0, 1])
            )
            for n in tri:
                base[2 * n : 2 * n + 2] += direction * (area / 3.0)
    else:
        found = False
        for edge in mesh.neumann_edges:
            if edge.tag != comp.region:
                continue
            found = True
            n0, n1 = edge.nodes
            base[2 * n0 : 2 * n0 + 2] += direction * (edge.length / 2.0)
            base[2 * n1 : 2 * n1 + 2] += direction * (edge.length / 2.0)
        if not found:
            raise MaterialError(
                f"load region {comp.region!r} is not among the mesh Neumann tags "
                f"{sorted(mesh.neumann_tags)}"
            )
    return base


def assemble_load(mesh: Mesh2D, schedule: LoadSchedule) -> AssembledLoad:
    return AssembledLoad(mesh, schedule)
