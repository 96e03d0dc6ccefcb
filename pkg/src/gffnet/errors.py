"""Exception hierarchy shared by all gffnet modules."""

from __future__ import annotations


class GFFError(Exception):
    """Base class for gffnet errors."""


class ParameterError(GFFError, ValueError):
    """An argument is outside its admissible range."""


class ModelDegenerateError(GFFError):
    """L + mu*I failed to factorize as a positive definite matrix."""


class DegenerateCharFn(GFFError):
    """An empirical characteristic function vanished at a probe point.

    Raised instead of clamping; it means n is too small (or eta too large)
    for the log-modulus formulas to make sense.
    """

    def __init__(self, probe: str, modulus: float):
        self.probe = probe
        self.modulus = modulus
        super().__init__(f"|charfn| = {modulus:.3g} at probe {probe}")


class IllConditionedPlugin(GFFError):
    """A matrix that must be inverted is singular or not positive definite."""

    def __init__(self, smallest: float, what: str = "eta*I - Leta_hat"):
        self.smallest = smallest
        super().__init__(f"{what} is not safely invertible (smallest eigen/singular value {smallest:.3g})")
