"""Semilinear system interface consumed by the exponential steppers."""

from abc import ABC, abstractmethod

from .matfunc import OperatorAction
from .types import DofVector


class SemilinearSystemBase(ABC):
    """du/dt = A u + F(u) on a finite-dimensional space."""

    @property
    @abstractmethod
    def dim(self) -> int:
        pass

    @abstractmethod
    def linear_action(self) -> OperatorAction:
        """The linear part A as an operator action."""

    @abstractmethod
    def nonlinear(self, u: DofVector) -> DofVector:
        """The (projected) nonlinearity F(u)."""

    @abstractmethod
    def jacobian(self, u: DofVector) -> OperatorAction:
        """Frechet derivative of F at u."""

    @abstractmethod
    def norm(self, v: DofVector) -> float:
        pass
