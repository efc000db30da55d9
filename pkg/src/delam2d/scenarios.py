"""Ready-made loading scenarios on the two-block mesh.

All loads come in equivariant pull-apart pairs (upper block loaded one
way, lower block the mirror-image way) so that mirror symmetry of the
evolution is preserved and the interface experiences pure opening.
"""

from __future__ import annotations

import numpy as np

from .geometry import Mesh2D, build_two_block_mesh
from .interface import InterfaceField
from .limits import Scenario
from .materials import LoadComponent, LoadSchedule, ModelParams, TimeProfile

LOAD_KINDS = ("none", "pull_apart", "peel_left")


def make_load(kind: str, magnitude: float, profile: TimeProfile) -> LoadSchedule:
    """Build one of the library loadings.

    ``pull_apart``: opposite vertical body forces on the two blocks.
    ``peel_left``: opposite vertical tractions on the two left edges.
    """
    if kind == "none":
        return LoadSchedule.none()
    if kind == "pull_apart":
        return LoadSchedule(
            components=(
                LoadComponent("body_plus", (0.0, magnitude), profile),
                LoadComponent("body_minus", (0.0, -magnitude), profile),
            )
        )
    if kind == "peel_left":
        return LoadSchedule(
            components=(
                LoadComponent("left_plus", (0.0, magnitude), profile),
                LoadComponent("left_minus", (0.0, -magnitude), profile),
            )
        )
    raise ValueError(f"unknown load kind {kind!r}; choose from {LOAD_KINDS}")


def default_mesh(width=2.0, height=0.5, nx=16, ny=4) -> Mesh2D:
    return build_two_block_mesh(
        width,
        height,
        nx,
        ny,
        dirichlet_spec={"top", "bottom"},
        neumann_spec={"left_plus", "left_minus", "right_plus", "right_minus"},
    )


def build_scenario(
    name: str,
    mesh: Mesh2D,
    params: ModelParams,
    tau: float,
    n_steps: int,
    z0: InterfaceField | None = None,
) -> Scenario:
    """Zero initial data scenario on the given mesh and parameters."""
    if z0 is None:
        z0 = InterfaceField.fully_bonded(mesh)
    zeros = np.zeros(mesh.n_dofs)
    return Scenario(
        name=name,
        mesh=mesh,
        params=params,
        tau=tau,
        n_steps=n_steps,
        u0=zeros.copy(),
        u1=zeros.copy(),
        z0=z0,
    )
