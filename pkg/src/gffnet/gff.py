"""The massive discrete Gaussian free field and its closed-form oracles.

A model is a Laplacian ``L`` plus a mass ``mu > 0``; the field has
precision ``L + mu*I`` and covariance ``Sigma = (L + mu*I)^{-1}``.
Everything exact about the estimator pipeline (the regularized target
``Leta = (Sigma + I/eta)^{-1}``, the characteristic-function oracle and its
normalizing constants) lives here.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import linalg

from .errors import ModelDegenerateError, ParameterError
from .graph import WeightedGraph, laplacian


@dataclass(frozen=True)
class SpectralSummary:
    eigenvalues_L: np.ndarray  # ascending
    eigenvectors: np.ndarray
    mu: float

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues_L[-1])

    @property
    def lambda_min_sigma(self) -> float:
        return 1.0 / (self.lambda_max + self.mu)


class GFFModel:
    """Laplacian plus mass. Immutable; the eigendecomposition is cached."""

    def __init__(self, L: np.ndarray, mu: float):
        L = np.array(L, dtype=float)
        if L.ndim != 2 or L.shape[0] != L.shape[1]:
            raise ParameterError(f"L must be square, got shape {L.shape}")
        if not np.array_equal(L, L.T):
            raise ParameterError("L must be exactly symmetric")
        if not mu > 0:
            raise ParameterError(f"mass must be positive, got {mu}")
        L.setflags(write=False)
        self.L = L
        self.mu = float(mu)
        self._lock = threading.Lock()
        self._spectrum: SpectralSummary | None = None
        try:
            self._chol = linalg.cholesky(self.precision(), lower=True)
        except linalg.LinAlgError as exc:
            raise ModelDegenerateError("L + mu*I is not positive definite") from exc
        self._chol.setflags(write=False)

    @classmethod
    def from_graph(cls, g: WeightedGraph, mu: float) -> "GFFModel":
        return cls(laplacian(g), mu)

    @property
    def d(self) -> int:
        return self.L.shape[0]

    def precision(self) -> np.ndarray:
        return self.L + self.mu * np.eye(self.d)

    @property
    def chol(self) -> np.ndarray:
        """Lower Cholesky factor ``C`` of the precision, ``C @ C.T = L + mu*I``."""
        return self._chol

    @property
    def spectrum(self) -> SpectralSummary:
        if self._spectrum is None:
            with self._lock:
                if self._spectrum is None:
                    w, V = np.linalg.eigh(self.L)
                    # L is PSD; roundoff can push the zero mode slightly negative
                    w = np.maximum(w, 0.0)
                    w.setflags(write=False)
                    V.setflags(write=False)
                    self._spectrum = SpectralSummary(w, V, self.mu)
        return self._spectrum

    def __repr__(self):
        return f"GFFModel(d={self.d}, mu={self.mu})"


@dataclass(frozen=True, eq=False)
class SampleSet:
    """``n`` field draws ``X`` paired with ``n`` auxiliary draws ``Y ~ N(0, eta*I)``.

    Rows are samples. ``Y`` is fixed at creation and shared by every probe
    vector evaluated on this set.
    """

    X: np.ndarray
    Y: np.ndarray
    eta: float
    seed: int | None = None

    def __post_init__(self):
        X = np.array(self.X, dtype=float, ndmin=2)
        Y = np.array(self.Y, dtype=float, ndmin=2)
        if X.shape != Y.shape or X.shape[0] < 1:
            raise ParameterError(f"X and Y must share a nonempty (n, d) shape, got {X.shape} and {Y.shape}")
        if not self.eta > 0:
            raise ParameterError(f"eta must be positive, got {self.eta}")
        X.setflags(write=False)
        Y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "eta", float(self.eta))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @cached_property
    def yx(self) -> np.ndarray:
        """Per-sample inner products <Y_k, X_k>."""
        return np.einsum("ij,ij->i", self.Y, self.X)


def _check_eta(eta: float):
    if not eta > 0:
        raise ParameterError(f"eta must be positive, got {eta}")


def covariance(m: GFFModel) -> np.ndarray:
    """``(L + mu*I)^{-1}`` by Cholesky solve."""
    S = linalg.cho_solve((m.chol, True), np.eye(m.d))
    return (S + S.T) / 2


def sample_field(m: GFFModel, n: int, eta: float, seed: int | np.random.SeedSequence | None = None) -> SampleSet:
    """Draw ``n`` i.i.d. field vectors plus the auxiliary Gaussians.

    ``X_k = C^{-T} Z_k`` with ``C`` the lower Cholesky factor of the
    precision, so Sigma is never formed. ``X`` and ``Y`` come from two
    independent children of the seed.
    """
    if int(n) != n or n < 1:
        raise ParameterError(f"sample count must be a positive integer, got {n}")
    _check_eta(eta)
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    x_ss, y_ss = ss.spawn(2)
    Z = np.random.default_rng(x_ss).standard_normal((m.d, int(n)))
    X = linalg.solve_triangular(m.chol, Z, lower=True, trans="T").T
    Y = np.random.default_rng(y_ss).standard_normal((int(n), m.d)) * np.sqrt(eta)
    return SampleSet(X, Y, eta, ss.entropy if isinstance(ss.entropy, int) else None)


def exact_Leta(m: GFFModel, eta: float) -> np.ndarray:
    """``(Sigma + I/eta)^{-1}`` from the spectrum of ``L``.

    Each eigenvalue ``s = 1/(lam + mu)`` of Sigma maps to ``1/(s + 1/eta)``.
    """
    _check_eta(eta)
    sp = m.spectrum
    vals = 1.0 / (1.0 / (sp.eigenvalues_L + m.mu) + 1.0 / eta)
    out = (sp.eigenvectors * vals) @ sp.eigenvectors.T
    return (out + out.T) / 2


def c_eta(m: GFFModel, eta: float) -> float:
    """``det(I + eta*Sigma)^{-1/2}``, accumulated in log space."""
    _check_eta(eta)
    lam = m.spectrum.eigenvalues_L
    return float(np.exp(-0.5 * np.sum(np.log1p(eta / (lam + m.mu)))))


def leta_norm(m: GFFModel, eta: float) -> float:
    """Operator norm of Leta, ``eta / (1 + eta * lambda_min(Sigma))``."""
    _check_eta(eta)
    return eta / (1.0 + eta * m.spectrum.lambda_min_sigma)


def c_star(m: GFFModel, eta: float) -> float:
    """Concentration scale ``c_eta/2 * exp(-|Leta|_2^2 / 2)``."""
    return 0.5 * c_eta(m, eta) * float(np.exp(-0.5 * leta_norm(m, eta) ** 2))


def exact_phi(m: GFFModel, eta: float, t) -> float:
    """E exp(i<Y, X + t>) in closed form: ``c_eta * exp(-<t, Leta t>/2)``."""
    t = np.asarray(t, dtype=float)
    q = float(t @ exact_Leta(m, eta) @ t)
    return c_eta(m, eta) * float(np.exp(-0.5 * q))
