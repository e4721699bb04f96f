"""Markov partition, transition matrices and Perron/Parry data for extremal maps.

Markov symbols run over ``1..16g-8`` with ``I_{2k-1} = [P_k, Q_k]`` and
``I_{2k} = [Q_k, P_{k+1}]``.  Matrices are stored 0-based, so symbol ``i``
is row ``i - 1``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .boundary import ParameterChoice
from .geometry import Arc, PolygonData, ccw_distance, sigma, wrap_index


class NotExtremalError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


def n_symbols(g: int) -> int:
    return 16 * g - 8


def wrap_symbol(i: int, g: int) -> int:
    return wrap_index(i, n_symbols(g))


def partition_endpoints(polygon: PolygonData) -> tuple:
    """(starts, ends) of ``I_1..I_{16g-8}`` as angle arrays."""
    pts = polygon.boundary_points()
    return pts, np.roll(pts, -1)


def markov_partition(polygon: PolygonData) -> list:
    starts, ends = partition_endpoints(polygon)
    return [Arc.between(a, b) for a, b in zip(starts, ends)]


def locate_symbol(polygon: PolygonData, x) -> int:
    """Symbol of the Markov interval containing ``x`` (intervals are half-open)."""
    starts, _ = partition_endpoints(polygon)
    offsets = ccw_distance(starts[0], starts)
    offsets[0] = 0.0
    return int(np.searchsorted(offsets, ccw_distance(starts[0], x), side="right"))


# ---------------------------------------------------------------------------
# transition matrices


def successors(g: int, i: int, mask_letter: str = "P") -> list:
    """Symbols ``j`` with ``f(I_i)`` covering ``I_j``.

    For odd ``i = 2k-1`` the answer depends on whether ``A_k = P_k`` or
    ``A_k = Q_k`` (``mask_letter``); even rows are the same for every
    extremal choice.
    """
    k = (i + 1) // 2
    s = sigma(k, g)
    if i % 2:
        if mask_letter == "P":
            js = (2 * s + 2, 2 * s + 3)
        else:
            js = (2 * s + 8 * g - 5, 2 * s + 8 * g - 4)
    else:
        js = tuple(2 * s + 4 + t for t in range(16 * g - 15))
    return [wrap_symbol(j, g) for j in js]


def _require_extremal(params: ParameterChoice) -> None:
    if not params.is_extremal:
        raise NotExtremalError("transition matrices exist only for extremal parameters")


def transition_matrix_from_formulas(params: ParameterChoice) -> np.ndarray:
    _require_extremal(params)
    g = params.genus
    m = n_symbols(g)
    M = np.zeros((m, m), dtype=np.int64)
    for i in range(1, m + 1):
        letter = params.mask[(i + 1) // 2 - 1]
        for j in successors(g, i, letter):
            M[i - 1, j - 1] = 1
    return M


def transition_matrix_geometric(params: ParameterChoice, tol: float = 1e-9) -> np.ndarray:
    """Transition matrix read off from numerically computed image arcs."""
    _require_extremal(params)
    poly = params.polygon
    starts, ends = partition_endpoints(poly)
    m = len(starts)
    M = np.zeros((m, m), dtype=np.int64)
    for i in range(1, m + 1):
        T = poly.gen(params.acting_generator(i))
        image = Arc.between(T.apply_angle(starts[i - 1]), T.apply_angle(ends[i - 1]))
        for j in range(m):
            if image.contains_arc(Arc.between(starts[j], ends[j]), tol):
                M[i - 1, j] = 1
    return M


def build_transition_matrix(params: ParameterChoice, validate: bool = True) -> np.ndarray:
    """Transition matrix of an extremal map, cross-checked against geometry."""
    M = transition_matrix_from_formulas(params)
    if validate:
        G = transition_matrix_geometric(params)
        if not np.array_equal(M, G):
            bad = np.argwhere(M != G)[0] + 1
            raise AssertionError(f"index formulas disagree with geometric images at entry {tuple(bad)}")
    return M


def transition_matrix(g: int, mask) -> np.ndarray:
    """Formula-only matrix for a P/Q mask (no polygon needed)."""
    m = n_symbols(g)
    M = np.zeros((m, m), dtype=np.int64)
    for i in range(1, m + 1):
        for j in successors(g, i, mask[(i + 1) // 2 - 1]):
            M[i - 1, j - 1] = 1
    return M


def is_admissible(M: np.ndarray, word: Sequence[int]) -> bool:
    return all(M[a - 1, b - 1] for a, b in zip(word, word[1:]))


# ---------------------------------------------------------------------------
# spectral data


def closed_form_lambda(g: int) -> float:
    """Perron value ``4g-3 + sqrt((4g-3)^2 - 1)`` shared by all extremal matrices."""
    if g < 2:
        raise ValueError("genus must be >= 2")
    b = 4 * g - 3
    return b + math.sqrt(b * b - 1)


def closed_form_eigenvectors(g: int) -> tuple:
    """Normalized right Perron vector of ``M`` and stationary vector of ``R``."""
    lam = closed_form_lambda(g)
    n = 8 * g - 4
    m = n_symbols(g)
    v = np.empty(m)
    p = np.empty(m)
    v[0::2] = 1.0 / (lam * n)
    v[1::2] = (lam - 1.0) / (lam * n)
    p[0::2] = 1.0 / (n * (lam + 1.0))
    p[1::2] = lam / (n * (lam + 1.0))
    return v, p


def stochastic_matrix(M: np.ndarray, lam: float, v: np.ndarray) -> np.ndarray:
    return M * v[None, :] / (lam * v[:, None])


def is_primitive(M: np.ndarray) -> bool:
    """Some power up to Wielandt's bound ``(m-1)^2 + 1`` is entrywise positive."""
    m = M.shape[0]
    B = (M > 0).astype(np.int64)
    P = B.copy()
    for _ in range((m - 1) ** 2 + 1):
        if P.all():
            return True
        P = ((P @ B) > 0).astype(np.int64)
    return False


def power_iteration(M: np.ndarray, tol: float = 1e-12, max_iter: int = 10_000) -> tuple:
    """Dominant eigenpair of a primitive non-negative matrix.

    Starts from the all-ones vector.  Returns ``(lambda, v)`` with ``v``
    normalized to sum one.
    """
    M = np.asarray(M, dtype=float)
    if not is_primitive(M):
        raise ConvergenceError("matrix is not primitive; no simple dominant eigenvalue")
    v = np.ones(M.shape[0]) / M.shape[0]
    lam = 0.0
    for _ in range(max_iter):
        w = M @ v
        lam = w.sum()
        w /= lam
        resid = np.linalg.norm(M @ w - lam * w) / (lam * np.linalg.norm(w))
        v = w
        if resid < tol:
            return float(lam), v
    raise ConvergenceError(f"power iteration did not converge in {max_iter} steps")


def power_iteration_batch(Ms: np.ndarray, iters: int = 60) -> tuple:
    """Vectorized power iteration over a stack of matrices; returns (lambdas, residuals)."""
    Ms = np.asarray(Ms, dtype=float)
    v = np.ones(Ms.shape[:2]) / Ms.shape[1]
    for _ in range(iters):
        w = np.einsum("bij,bj->bi", Ms, v)
        lam = w.sum(axis=1)
        v = w / lam[:, None]
    w = np.einsum("bij,bj->bi", Ms, v)
    lam = w.sum(axis=1)
    resid = np.linalg.norm(w - lam[:, None] * v, axis=1) / (lam * np.linalg.norm(v, axis=1))
    return lam, resid


@dataclass(frozen=True)
class SpectralData:
    lam: float
    v: np.ndarray
    p: np.ndarray
    R: np.ndarray
    M: np.ndarray

    def to_json(self) -> str:
        return json.dumps(
            {"lambda": self.lam, "v": [float(x) for x in self.v], "p": [float(x) for x in self.p]},
            indent=2,
        )


def stationary_vector(R: np.ndarray) -> np.ndarray:
    """Left eigenvector of a stochastic matrix for eigenvalue 1, summing to one."""
    w, vecs = np.linalg.eig(R.T)
    p = np.real(vecs[:, np.argmin(np.abs(w - 1.0))])
    return p / p.sum()


def left_formula_residual(M: np.ndarray) -> float:
    """``max |pR - p|`` for the closed-form ``p``.

    Small for ``M_P`` and ``M_Q``; of order ``1e-3`` when the mask mixes
    ``P`` and ``Q``, where the closed form is not the stationary vector.
    """
    g = (M.shape[0] + 8) // 16
    lam = closed_form_lambda(g)
    v, p = closed_form_eigenvectors(g)
    return float(np.max(np.abs(p @ stochastic_matrix(M, lam, v) - p)))


def spectral_data(M: np.ndarray, closed_form: bool = True) -> SpectralData:
    """Perron data of an extremal transition matrix.

    With ``closed_form``, ``lambda`` and ``v`` come from the genus formulas
    and so does ``p`` when it is stationary for ``R``; otherwise ``p`` is
    solved for.  Without ``closed_form`` everything is numerical (power
    iteration for ``v``, a left eigen-solve of ``R`` for ``p``).
    """
    m = M.shape[0]
    g = (m + 8) // 16
    if closed_form:
        lam = closed_form_lambda(g)
        v, p = closed_form_eigenvectors(g)
        R = stochastic_matrix(M, lam, v)
        if np.max(np.abs(p @ R - p)) > 1e-12:
            p = stationary_vector(R)
    else:
        lam, v = power_iteration(M)
        R = stochastic_matrix(M, lam, v)
        p = stationary_vector(R)
    return SpectralData(lam, v, p, R, M)


def parry_measure(spec: SpectralData, word: Sequence[int]) -> float:
    """Parry measure of the symbolic cylinder ``[w_0 ... w_n]``; 0 if inadmissible."""
    if len(word) == 0:
        raise ValueError("empty word")
    if not is_admissible(spec.M, word):
        return 0.0
    a, b = word[0] - 1, word[-1] - 1
    return float(spec.p[a] * spec.v[b] / (spec.lam ** (len(word) - 1) * spec.v[a]))


def count_sequences(M: np.ndarray, n: int) -> tuple:
    """Exact counts of admissible words of length ``n+1``: (total, odd-final, even-final)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    B = [[int(x) for x in row] for row in np.asarray(M)]
    m = len(B)
    # ends[j]: number of admissible words of the current length ending in symbol j+1
    ends = [1] * m
    for _ in range(n):
        ends = [sum(ends[i] for i in range(m) if B[i][j]) for j in range(m)]
    odd = sum(ends[0::2])
    even = sum(ends[1::2])
    return odd + even, odd, even


def entrywise_power_sum(M: np.ndarray, n: int) -> int:
    """Sum of entries of ``M^n`` in exact integer arithmetic."""
    A = np.array(M, dtype=object)
    P = np.identity(A.shape[0], dtype=object)
    for _ in range(n):
        P = P.dot(A)
    return int(P.sum())


def matrix_to_csv(M: np.ndarray) -> str:
    return "\n".join(",".join(str(int(x)) for x in row) for row in M) + "\n"


def matrix_from_csv(text: str) -> np.ndarray:
    rows = [line.split(",") for line in text.strip().splitlines()]
    return np.array([[int(x) for x in r] for r in rows], dtype=np.int64)
