import numpy as np
import pytest

from delam2d.geometry import build_two_block_mesh
from delam2d.materials import ModelParams, ScalingMode, TimeProfile
from delam2d.scenarios import make_load


@pytest.fixture(scope="session")
def unit_mesh():
    """Two 1x1 blocks, 4x4 cells each; no loading tags."""
    return build_two_block_mesh(
        1.0, 1.0, 4, 4, {"top", "bottom"}, {"left_plus", "left_minus"}
    )


@pytest.fixture(scope="session")
def peel_mesh():
    """The standard peeling geometry: 2.0 x 0.5 blocks, 16 x 4 cells."""
    return build_two_block_mesh(
        2.0,
        0.5,
        16,
        4,
        {"top", "bottom"},
        {"left_plus", "left_minus", "right_plus", "right_minus"},
    )


def _base_kwargs():
    return dict(
        rho=1.0,
        lame_lambda_C=1.0,
        lame_mu_C=1.0,
        lame_lambda_D=0.1,
        lame_mu_D=0.1,
        a0=0.005,
        a1=0.005,
        b=0.001,
    )


def peel_params(k: float = 100.0, scaling=ScalingMode.CONSTANT, magnitude=6.0):
    return ModelParams(
        k=k,
        scaling=scaling,
        load=make_load("peel_left", magnitude, TimeProfile("ramp")),
        **_base_kwargs(),
    )


def quiet_params(k: float = 100.0, **overrides):
    kwargs = _base_kwargs()
    kwargs.update(overrides)
    return ModelParams(k=k, **kwargs)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
