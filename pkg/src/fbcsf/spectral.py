"""Finite-difference eigenproblem -phi'' = mu phi on [-1, 1], phi'(+-1) = +-phi(+-1).

Unknowns are the n interior points plus both boundary points. The boundary
rows come from a centred difference with the ghost value eliminated through
the Robin condition, e.g. at x = 1:  (-2 phi_n + (2 - 2h) phi_{n+1}) / h^2.
The matrix is symmetric after weighting by the trapezoid rule, so the
problem is solved as a symmetric-definite pencil.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .exact_forms import _bisect_newton, solve_lambda0

__all__ = [
    "RobinEigenProblem",
    "SpectralResult",
    "SpectralError",
    "solve",
    "even_restriction",
    "decay_rate_prediction",
    "boundary_residual",
    "even_wavenumber",
    "odd_wavenumber",
    "count_negative",
]

NEGATIVE_THRESHOLD = -1e-8


class SpectralError(RuntimeError):
    """The dense eigensolver failed."""


@dataclass(frozen=True)
class RobinEigenProblem:
    n: int

    def __post_init__(self):
        if self.n < 16:
            raise ValueError(f"need at least 16 interior points, got {self.n}")

    @property
    def h(self) -> float:
        return 2.0 / (self.n + 1)

    @property
    def x(self) -> np.ndarray:
        """All n + 2 nodes including both boundary points."""
        return np.linspace(-1.0, 1.0, self.n + 2)

    def operator(self) -> np.ndarray:
        m = self.n + 2
        h2 = self.h * self.h
        M = (np.diag(np.full(m, 2.0)) - np.diag(np.ones(m - 1), 1) - np.diag(np.ones(m - 1), -1)) / h2
        edge = (2.0 - 2.0 * self.h) / h2
        M[0, 0] = M[-1, -1] = edge
        M[0, 1] = M[-1, -2] = -2.0 / h2
        return M

    def weights(self) -> np.ndarray:
        w = np.full(self.n + 2, self.h)
        w[0] = w[-1] = 0.5 * self.h
        return w


@dataclass(frozen=True, eq=False)
class SpectralResult:
    eigenvalues: np.ndarray
    modes: np.ndarray  # one sup-normalized mode per row
    x: np.ndarray
    weights: np.ndarray

    def inner(self, i: int, j: int) -> float:
        return float(np.sum(self.weights * self.modes[i] * self.modes[j]))


def _normalize(vecs: np.ndarray) -> np.ndarray:
    out = []
    for v in vecs.T:
        k = int(np.argmax(np.abs(v)))
        out.append(v / v[k])
    return np.array(out)


def _pencil(A: np.ndarray, B: np.ndarray):
    try:
        return linalg.eigh(A, B)
    except (linalg.LinAlgError, ValueError) as exc:
        raise SpectralError(str(exc)) from exc


def solve(p: RobinEigenProblem) -> SpectralResult:
    """All eigenpairs, ascending; modes scaled to sup norm 1 with positive peak."""
    w = p.weights()
    S = w[:, None] * p.operator()
    S = 0.5 * (S + S.T)  # symmetric up to round-off already
    mu, vecs = _pencil(S, np.diag(w))
    return SpectralResult(eigenvalues=mu, modes=_normalize(vecs), x=p.x, weights=w)


def _even_basis(m: int) -> np.ndarray:
    half = (m + 1) // 2
    E = np.zeros((m, half))
    for j in range(half):
        E[j, j] = 1.0
        E[m - 1 - j, j] = 1.0
    return E


def even_restriction(p: RobinEigenProblem) -> SpectralResult:
    """Eigenpairs among grid functions with phi(x) = phi(-x)."""
    w = p.weights()
    E = _even_basis(p.n + 2)
    S = w[:, None] * p.operator()
    S = 0.5 * (S + S.T)
    mu, c = _pencil(E.T @ S @ E, E.T @ (w[:, None] * E))
    return SpectralResult(eigenvalues=mu, modes=_normalize(E @ c), x=p.x, weights=w)


def decay_rate_prediction() -> float:
    """lambda0^2, the backward exponential rate of the height."""
    lam0 = solve_lambda0()
    return lam0 * lam0


def count_negative(res: SpectralResult, threshold: float = NEGATIVE_THRESHOLD) -> int:
    return int(np.sum(res.eigenvalues < threshold))


def boundary_residual(res: SpectralResult, i: int) -> float:
    """max over both ends of |phi'(+-1) -+ phi(+-1)| with one-sided second-order differences."""
    v = res.modes[i]
    h = res.x[1] - res.x[0]
    dr = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * h)
    dl = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
    return float(max(abs(dr - v[-1]), abs(dl + v[0])))


def even_wavenumber(j: int = 1) -> float:
    """j-th positive root of k tan k = -1 (even positive modes cos(kx))."""
    lo = (j - 0.5) * math.pi + 1e-12
    hi = j * math.pi - 1e-12
    return _bisect_newton(
        lambda k: k * math.sin(k) + math.cos(k),
        lambda k: k * math.cos(k),
        lo,
        hi,
    )


def odd_wavenumber(j: int = 1) -> float:
    """j-th positive root of tan k = k (odd positive modes sin(kx))."""
    lo = j * math.pi + 1e-12
    hi = (j + 0.5) * math.pi - 1e-12
    return _bisect_newton(
        lambda k: math.sin(k) - k * math.cos(k),
        lambda k: k * math.sin(k),
        lo,
        hi,
    )
