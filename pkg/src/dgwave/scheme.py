"""
Scheme abstraction.

Protocol shared by the DG solver and the finite-difference comparator so
one run loop drives both.
"""

from abc import ABC, abstractmethod
from typing import Protocol, Tuple, TypeVar, runtime_checkable

import numpy as np


@runtime_checkable
class SchemeState(Protocol):
    """Anything carrying a discrete time and step index; the run loop reads both."""

    @property
    def t(self) -> float: ...

    @property
    def n(self) -> int: ...


StateT = TypeVar("StateT", bound=SchemeState)


class Scheme(Protocol[StateT]):
    """
    Protocol for explicit one-step schemes on the split system
    u_t + u_x = phi, phi_t - phi_x = |u|^p.

    Implementations own the mesh, the initial data and the step formula.
    """

    name: str
    h: float
    p: float

    def initial_state(self) -> StateT:
        """Discrete initial data at t = 0, n = 0."""
        ...

    def step(self, state: StateT, dt: float) -> StateT:
        """
        Advance one step.

        Args:
            state: current state
            dt: step size, > 0

        Returns:
            New state at t + dt, n + 1 (may contain non-finite values)

        Raises:
            CFLViolationError: dt outside the scheme's stability limit
        """
        ...

    def sup_norms(self, state: StateT) -> Tuple[float, float]:
        """(max |u|, max |phi|) over all degrees of freedom."""
        ...

    def mean_values(self, state: StateT) -> Tuple[float, float]:
        """(K_h(u), K_h(phi)), the discrete spatial means."""
        ...

    def node_positions(self) -> np.ndarray:
        """Physical coordinates of the degrees of freedom, flattened."""
        ...

    def nodal_u(self, state: StateT) -> np.ndarray:
        """Values of u at node_positions(), flattened."""
        ...

    def lam(self) -> float:
        """Mean-value power constant of the scheme's quadrature."""
        ...


class BaseScheme(ABC):
    """
    Abstract base class for scheme implementations.

    Provides the pieces every scheme shares.
    """

    name: str = "base"
    h: float
    p: float

    @abstractmethod
    def initial_state(self):  # type: ignore[no-untyped-def]
        """Discrete initial data."""
        pass

    @abstractmethod
    def step(self, state, dt: float):  # type: ignore[no-untyped-def]
        """One explicit step."""
        pass

    @abstractmethod
    def sup_norms(self, state) -> Tuple[float, float]:  # type: ignore[no-untyped-def]
        """Sup-norms of u and phi."""
        pass

    @abstractmethod
    def mean_values(self, state) -> Tuple[float, float]:  # type: ignore[no-untyped-def]
        """K_h of u and phi."""
        pass

    @abstractmethod
    def node_positions(self) -> np.ndarray:
        """Flattened physical node coordinates."""
        pass

    @abstractmethod
    def nodal_u(self, state) -> np.ndarray:  # type: ignore[no-untyped-def]
        """Flattened nodal values of u."""
        pass

    def lam(self) -> float:
        """
        Mean-value power constant.

        Optional - override for quadratures whose largest weight exceeds the mean.
        """
        return 1.0

    def describe(self) -> str:
        return f"{self.name}(h={self.h:.6g}, p={self.p:g})"
