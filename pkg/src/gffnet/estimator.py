"""Two-stage Fourier estimator of the precision matrix.

Stage one estimates ``Leta = (Sigma + I/eta)^{-1}`` from log-moduli of the
empirical statistic ``phi_n(t) = mean_k exp(i<Y_k, X_k + t>)`` at the probes
``0``, ``e_i`` and ``(e_i + e_j)/sqrt(2)``. Stage two undoes the
regularization with the Woodbury rearrangement
``Sigma^{-1} = eta^2 (eta*I - Leta)^{-1} - eta*I``.

All probe points reuse the single ``Y`` sequence stored on the SampleSet.
The concentration results hold per probe, which is what fresh ``Y`` per
probe would give literally; sharing them is what makes the O(n d^2) batch
evaluation possible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import linalg

from .errors import DegenerateCharFn, IllConditionedPlugin, ParameterError
from .gff import GFFModel, SampleSet, exact_phi

SQRT_HALF = np.sqrt(0.5)
# |mean of unit-modulus terms| below this is indistinguishable from 0 in float64
ZERO_MODULUS = 64 * np.finfo(float).eps
CHUNK_ROWS = 1 << 16

KINDS = ("Leta", "Precision", "Covariance")


@dataclass(frozen=True)
class CharFnEstimate:
    value: complex
    t: np.ndarray
    n: int


@dataclass(frozen=True)
class LogModulusStat:
    value: float
    t: np.ndarray


@dataclass(frozen=True, eq=False)
class SymmetricMatrixEstimate:
    entries: np.ndarray
    kind: str
    eta: float | None = None
    U: float | None = None
    n: int | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown estimate kind {self.kind!r}")
        E = np.array(self.entries, dtype=float)
        if E.ndim != 2 or E.shape[0] != E.shape[1]:
            raise ParameterError(f"estimate must be square, got {E.shape}")
        E.setflags(write=False)
        object.__setattr__(self, "entries", E)

    @property
    def d(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True, eq=False)
class ProbeTable:
    """Characteristic-function values at the canonical probe points.

    ``axes[i]`` is the value at ``scale*e_i`` and ``pairs[i, j]`` (i != j) at
    ``scale*(e_i + e_j)/sqrt(2)``; the diagonal of ``pairs`` is unused.
    """

    zero: complex
    axes: np.ndarray
    pairs: np.ndarray
    scale: float = 1.0
    n: int | None = field(default=None)

    @property
    def d(self) -> int:
        return self.axes.shape[0]


def probe_label(i: int | None = None, j: int | None = None, scale: float = 1.0) -> str:
    pre = "" if scale == 1.0 else f"{scale:g}*"
    if i is None:
        return "0"
    if j is None or j == i:
        return f"{pre}e_{i}"
    return f"{pre}(e_{i}+e_{j})/sqrt2"


def phi_n(s: SampleSet, t) -> CharFnEstimate:
    t = np.asarray(t, dtype=float)
    if t.shape != (s.d,):
        raise ParameterError(f"probe must have shape ({s.d},), got {t.shape}")
    value = np.mean(np.exp(1j * (s.yx + s.Y @ t)))
    return CharFnEstimate(complex(value), t, s.n)


def sample_probe_table(s: SampleSet, chunk: int = CHUNK_ROWS) -> ProbeTable:
    """All ``phi_n`` probe values in one O(n d^2) pass over the samples.

    exp(i<Y, (e_i+e_j)/sqrt2>) factors as E_i E_j with E = exp(iY/sqrt2),
    so the pair table is a single Gram-type product. Chunks are summed in a
    fixed order.
    """
    d = s.d
    zero = 0j
    axes = np.zeros(d, dtype=complex)
    pairs = np.zeros((d, d), dtype=complex)
    for start in range(0, s.n, chunk):
        sl = slice(start, start + chunk)
        base = np.exp(1j * s.yx[sl])
        E = np.exp(1j * SQRT_HALF * s.Y[sl])
        W = E * base[:, None]
        zero += base.sum()
        axes += (np.exp(1j * s.Y[sl]) * base[:, None]).sum(axis=0)
        pairs += W.T @ E
    pairs = (pairs + pairs.T) / 2
    np.fill_diagonal(pairs, np.nan)
    return ProbeTable(zero / s.n, axes / s.n, pairs / s.n, n=s.n)


def charfn_probe_table(fn: Callable[[np.ndarray], complex], d: int, scale: float = 1.0) -> ProbeTable:
    """Probe table from an arbitrary characteristic function (oracle mode)."""
    eye = np.eye(d)
    axes = np.array([fn(scale * eye[i]) for i in range(d)], dtype=complex)
    pairs = np.full((d, d), np.nan, dtype=complex)
    for i in range(d):
        for j in range(i + 1, d):
            pairs[i, j] = pairs[j, i] = fn(scale * SQRT_HALF * (eye[i] + eye[j]))
    return ProbeTable(complex(fn(np.zeros(d))), axes, pairs, scale=scale)


def oracle_probe_table(m: GFFModel, eta: float) -> ProbeTable:
    return charfn_probe_table(lambda t: exact_phi(m, eta, t), m.d)


def log_moduli(table: ProbeTable) -> tuple[float, np.ndarray, np.ndarray]:
    """``log|.|`` of every used probe value; zero modulus raises."""
    d = table.d
    mods = [(abs(table.zero), None, None)]
    mods += [(abs(table.axes[i]), i, None) for i in range(d)]
    mods += [(abs(table.pairs[i, j]), i, j) for i in range(d) for j in range(i + 1, d)]
    for mod, i, j in mods:
        if not mod > ZERO_MODULUS:
            raise DegenerateCharFn(probe_label(i, j, table.scale), float(mod))
    log_pairs = np.log(np.abs(table.pairs))
    return float(np.log(abs(table.zero))), np.log(np.abs(table.axes)), log_pairs


def assemble_Leta(table: ProbeTable) -> np.ndarray:
    """Stage-one entries from probe values, upper triangle mirrored."""
    lz, la, lp = log_moduli(table)
    d = table.d
    out = np.empty((d, d))
    for i in range(d):
        out[i, i] = -2.0 * la[i] + 2.0 * lz
        for j in range(i + 1, d):
            out[i, j] = out[j, i] = -2.0 * lp[i, j] + la[i] + la[j]
    return out


def estimate_Leta(s: SampleSet) -> SymmetricMatrixEstimate:
    return SymmetricMatrixEstimate(assemble_Leta(sample_probe_table(s)), "Leta", eta=s.eta, n=s.n, seed=s.seed)


def oracle_Leta(m: GFFModel, eta: float) -> SymmetricMatrixEstimate:
    """Stage one run on the exact characteristic function instead of samples."""
    return SymmetricMatrixEstimate(assemble_Leta(oracle_probe_table(m, eta)), "Leta", eta=eta)


def estimate_precision(lhat: SymmetricMatrixEstimate | np.ndarray, eta: float) -> SymmetricMatrixEstimate:
    """Woodbury plug-in ``eta^2 (eta*I - lhat)^{-1} - eta*I``.

    ``eta*I - lhat`` must be positive definite (it is, for the true Leta);
    otherwise IllConditionedPlugin carries its smallest eigenvalue.
    """
    if isinstance(lhat, SymmetricMatrixEstimate):
        if lhat.kind != "Leta":
            raise ParameterError(f"expected a Leta estimate, got kind={lhat.kind}")
        if lhat.eta is not None and lhat.eta != eta:
            raise ParameterError(f"eta mismatch: estimate built with {lhat.eta}, plug-in called with {eta}")
        meta = dict(n=lhat.n, seed=lhat.seed)
        L = lhat.entries
    else:
        meta = {}
        L = np.asarray(lhat, dtype=float)
    d = L.shape[0]
    A = eta * np.eye(d) - L
    try:
        C = linalg.cholesky(A, lower=True)
    except linalg.LinAlgError:
        raise IllConditionedPlugin(float(np.linalg.eigvalsh((A + A.T) / 2)[0])) from None
    M = eta**2 * linalg.cho_solve((C, True), np.eye(d)) - eta * np.eye(d)
    return SymmetricMatrixEstimate((M + M.T) / 2, "Precision", eta=eta, **meta)


def recover_support(prec: SymmetricMatrixEstimate | np.ndarray, tau: float = 0.5) -> frozenset[tuple[int, int]]:
    """Edges ``(i, j)``, ``i < j``, whose precision entry is at most ``-tau``."""
    if not tau > 0:
        raise ParameterError(f"threshold must be positive, got {tau}")
    P = prec.entries if isinstance(prec, SymmetricMatrixEstimate) else np.asarray(prec)
    iu, ju = np.triu_indices(P.shape[0], k=1)
    hit = P[iu, ju] <= -tau
    return frozenset(zip(iu[hit].tolist(), ju[hit].tolist()))


def log_modulus_deviation(value: complex, m: GFFModel, eta: float, t) -> LogModulusStat:
    """``log|value| - log|phi(t)|`` for any stand-in value of the statistic."""
    t = np.asarray(t, dtype=float)
    if not abs(value) > ZERO_MODULUS:
        raise DegenerateCharFn(str(t.tolist()), abs(value))
    return LogModulusStat(float(np.log(abs(value)) - np.log(exact_phi(m, eta, t))), t)


def s_n(s: SampleSet, m: GFFModel, t) -> LogModulusStat:
    """``log|phi_n(t)| - log|phi(t)|``; needs the true model, diagnostic only."""
    est = phi_n(s, t)
    return log_modulus_deviation(est.value, m, s.eta, est.t)
