"""Vanilla spectral covariance estimator (Belomestny-Trabs style) and its inverse.

``Sigma_ii = -(2/U^2) log|psi_n(U e_i)|`` and
``Sigma_ij = -(2/U^2) log|psi_n(U (e_i+e_j)/sqrt2)| - (Sigma_ii + Sigma_jj)/2``
with ``psi_n`` the empirical characteristic function of X. ``Re log z`` is
taken as ``log|z|``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import linalg

from .errors import IllConditionedPlugin, ParameterError
from .estimator import SQRT_HALF, CHUNK_ROWS, ProbeTable, SymmetricMatrixEstimate, charfn_probe_table, log_moduli


@dataclass(frozen=True)
class BaselineConfig:
    U: float | None = None
    R: float = 1.0
    gamma: float = 2.0
    c0: float = 0.25

    def __post_init__(self):
        if not self.R > 0:
            raise ParameterError(f"R must be positive, got {self.R}")
        if not self.gamma > np.sqrt(2):
            raise ParameterError(f"gamma must exceed sqrt(2), got {self.gamma}")
        if self.U is not None and not self.U > 0:
            raise ParameterError(f"U must be positive, got {self.U}")


class TailRadius(NamedTuple):
    value: float
    applicable: bool


def psi_n(X: np.ndarray, u) -> complex:
    X = np.asarray(X, dtype=float)
    return complex(np.mean(np.exp(1j * (X @ np.asarray(u, dtype=float)))))


def sample_bmt_table(X: np.ndarray, U: float, chunk: int = CHUNK_ROWS) -> ProbeTable:
    X = np.asarray(X, dtype=float)
    n, d = X.shape
    axes = np.zeros(d, dtype=complex)
    pairs = np.zeros((d, d), dtype=complex)
    for start in range(0, n, chunk):
        block = X[start:start + chunk]
        F = np.exp(1j * U * SQRT_HALF * block)
        axes += np.exp(1j * U * block).sum(axis=0)
        pairs += F.T @ F
    pairs = (pairs + pairs.T) / 2
    np.fill_diagonal(pairs, np.nan)
    return ProbeTable(1 + 0j, axes / n, pairs / n, scale=U, n=n)


def gaussian_charfn(sigma: np.ndarray):
    """Exact characteristic function ``u -> exp(-<u, Sigma u>/2)``."""
    sigma = np.asarray(sigma, dtype=float)
    return lambda u: np.exp(-0.5 * (u @ sigma @ u))


def sigma_from_table(table: ProbeTable) -> np.ndarray:
    _, la, lp = log_moduli(table)
    k = -2.0 / table.scale**2
    diag = k * la
    out = np.diag(diag)
    iu, ju = np.triu_indices(table.d, k=1)
    out[iu, ju] = k * lp[iu, ju] - 0.5 * (diag[iu] + diag[ju])
    out[ju, iu] = out[iu, ju]
    return out


def estimate_sigma_bmt(X: np.ndarray, cfg: BaselineConfig, seed: int | None = None) -> SymmetricMatrixEstimate:
    if cfg.U is None:
        raise ParameterError("BaselineConfig.U must be set; see canonical_U / improvised_U")
    X = np.asarray(X, dtype=float)
    table = sample_bmt_table(X, cfg.U)
    return SymmetricMatrixEstimate(sigma_from_table(table), "Covariance", U=cfg.U, n=X.shape[0], seed=seed)


def oracle_sigma_bmt(sigma: np.ndarray, U: float) -> SymmetricMatrixEstimate:
    table = charfn_probe_table(gaussian_charfn(sigma), sigma.shape[0], scale=U)
    return SymmetricMatrixEstimate(sigma_from_table(table), "Covariance", U=U)


def canonical_U(cfg: BaselineConfig, n: int, d: int) -> float:
    """``c0 R^{-1/2} sqrt(log(n / log(e d)))``."""
    led = np.log(np.e * d)
    if not n > led:
        raise ParameterError(f"canonical U needs n > log(e*d) = {led:.3g}, got n={n}")
    return float(cfg.c0 / np.sqrt(cfg.R) * np.sqrt(np.log(n / led)))


def improvised_U(cfg: BaselineConfig) -> float:
    return float(1.0 / np.sqrt(cfg.R))


def bmt_condition(cfg: BaselineConfig, U: float, n: int, d: int) -> bool:
    """``8 gamma sqrt(log(e d)/n) < exp(-R U^2)``."""
    return bool(8 * cfg.gamma * np.sqrt(np.log(np.e * d) / n) < np.exp(-cfg.R * U**2))


def tau_bound(cfg: BaselineConfig, n: int, d: int, U: float | None = None) -> TailRadius:
    """Entrywise error radius ``6 gamma e^{R U^2} U^{-2} sqrt(log(e d)/n)``.

    The value is always computed; ``applicable`` is False when U < 1 or the
    sample-size condition fails, in which case no tail guarantee backs it.
    """
    U = cfg.U if U is None else U
    if U is None:
        raise ParameterError("no U given")
    value = 6 * cfg.gamma * np.exp(cfg.R * U**2) / U**2 * np.sqrt(np.log(np.e * d) / n)
    return TailRadius(float(value), U >= 1 and bmt_condition(cfg, U, n, d))


def tail_probability(gamma: float, d: int) -> float:
    """Failure probability ``12 e^{-gamma^2} d^{2-gamma^2}`` paired with tau_bound."""
    return float(12 * np.exp(-gamma**2) * d ** (2 - gamma**2))


def invert_baseline(sig: SymmetricMatrixEstimate | np.ndarray) -> SymmetricMatrixEstimate:
    if isinstance(sig, SymmetricMatrixEstimate):
        S, meta = sig.entries, dict(U=sig.U, n=sig.n, seed=sig.seed)
    else:
        S, meta = np.asarray(sig, dtype=float), {}
    sv = np.linalg.svd(S, compute_uv=False)
    if not sv[-1] > S.shape[0] * np.finfo(float).eps * sv[0]:
        raise IllConditionedPlugin(float(sv[-1]), what="Sigma_hat")
    M = linalg.solve(S, np.eye(S.shape[0]))
    return SymmetricMatrixEstimate((M + M.T) / 2, "Precision", **meta)
