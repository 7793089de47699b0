"""Shared fixtures."""

from typing import Callable

import numpy as np
import pytest

from dgwave.dg_solver import Mesh, ProblemConfig
from dgwave.reference_element import ReferenceElement, build_reference_element


@pytest.fixture
def p1() -> ReferenceElement:
    return build_reference_element(1)


@pytest.fixture
def p0() -> ReferenceElement:
    return build_reference_element(0)


@pytest.fixture
def unit_mesh() -> Mesh:
    return Mesh(0.0, 1.0, 32)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def zero_problem() -> ProblemConfig:
    return ProblemConfig(p=2.0, u0=lambda x: 0.0, u1=lambda x: 0.0, du0=lambda x: 0.0)


@pytest.fixture
def constant_problem() -> Callable[..., ProblemConfig]:
    """Factory for u = c0, phi = d0 everywhere (u1 = d0 since u0' = 0)."""

    def make(c0: float, d0: float, p: float = 2.0) -> ProblemConfig:
        return ProblemConfig(p=p, u0=lambda x: c0, u1=lambda x: d0, du0=lambda x: 0.0)

    return make
