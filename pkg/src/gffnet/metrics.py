"""Error norms, bound evaluators and rate fitting."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .errors import ParameterError
from .estimator import SymmetricMatrixEstimate, recover_support


@dataclass(frozen=True)
class ErrorReport:
    frob_scaled: float
    frob: float
    op_norm: float
    entry_max: float
    support_exact: bool | None = None

    def as_dict(self) -> dict:
        return asdict(self)


class TaggedBound(NamedTuple):
    value: float
    applicable: bool


def _entries(x) -> np.ndarray:
    return x.entries if isinstance(x, SymmetricMatrixEstimate) else np.asarray(x, dtype=float)


def op_norm_sym(M: np.ndarray) -> float:
    """Spectral norm of the symmetric part of ``M``."""
    M = (M + M.T) / 2
    return float(np.max(np.abs(np.linalg.eigvalsh(M)))) if M.size else 0.0


def error_report(estimate, truth, true_edges=None, tau: float = 0.5) -> ErrorReport:
    E, T = _entries(estimate), _entries(truth)
    if E.shape != T.shape:
        raise ParameterError(f"shape mismatch: {E.shape} vs {T.shape}")
    D = E - T
    frob = float(np.linalg.norm(D, "fro"))
    support = None
    if true_edges is not None:
        support = recover_support(E, tau) == frozenset(true_edges)
    return ErrorReport(
        frob_scaled=frob / E.shape[0],
        frob=frob,
        op_norm=op_norm_sym(D),
        entry_max=float(np.max(np.abs(D))),
        support_exact=support,
    )


def bound_phi_tail(n: int, x: float, simplified: bool = False) -> float:
    """Bernstein tail for ``|phi_n(t) - phi(t)| >= x``.

    Full form ``4 exp(-3 n x^2 / (24 + 8x))``; the simplified form
    ``4 exp(-3 n x^2 / 32)`` is only claimed for ``x`` in (0, 1].
    """
    if not x > 0:
        raise ParameterError(f"x must be positive, got {x}")
    if simplified:
        return float(4 * np.exp(-3 * n * x**2 / 32))
    return float(4 * np.exp(-3 * n * x**2 / (24 + 8 * x)))


def bound_sigma_error(lambda1: float, mu: float, eta: float, leta_err_op: float, leta_err_frob_scaled: float) -> TaggedBound:
    """Bound on ``(1/d)|Prec_hat - Prec|_F`` given the stage-one error.

    With ``k = (lambda1 + mu + eta) / eta^2`` (the norm of
    ``(eta*I - Leta)^{-1}``) and ``e = |Leta_hat - Leta|_2 < 1/k``:
    ``eta^2 k^2 / (1 - k e) * (1/d)|Leta_hat - Leta|_F``.
    When ``k e >= 1`` the value is inf and ``applicable`` is False.
    """
    k = (lambda1 + mu + eta) / eta**2
    q = k * leta_err_op
    if not q < 1:
        return TaggedBound(float("inf"), False)
    return TaggedBound(float(eta**2 * k**2 / (1 - q) * leta_err_frob_scaled), True)


def bound_inverse_error(s_min: float, err_op: float, err_frob_scaled: float) -> TaggedBound:
    """``(1/d)|S_hat^{-1} - S^{-1}|_F <= (1/d)|S_hat - S|_F / (s (s - |S_hat - S|_2))``."""
    if not s_min > err_op:
        return TaggedBound(float("inf"), False)
    return TaggedBound(float(err_frob_scaled / (s_min * (s_min - err_op))), True)


def fit_rate_slope(points: Iterable[tuple[float, float]]) -> float:
    """Least-squares slope of log(error) against log(n)."""
    pts = np.asarray(list(points), dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3:
        raise ParameterError("need at least 3 (n, error) points")
    if np.any(pts <= 0) or not np.all(np.isfinite(pts)):
        raise ParameterError("n and error values must be positive and finite")
    x, y = np.log(pts[:, 0]), np.log(pts[:, 1])
    x = x - x.mean()
    return float(x @ (y - y.mean()) / (x @ x))


def binomial_se(count: int, reps: int) -> float:
    f = count / reps
    return float(np.sqrt(f * (1 - f) / reps))
