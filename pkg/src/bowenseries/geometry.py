"""Circle and disc primitives, and the regular (8g-4)-gon with its side-pairing generators.

Angles are radians normalized to (-pi, pi].  Indices of sides and generators
live in ``1..8g-4``; any integer is accepted and reduced cyclically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

TWO_PI = 2.0 * math.pi


class GeometryError(ValueError):
    """Raised when polygon data cannot be assembled consistently."""


# ---------------------------------------------------------------------------
# angle arithmetic


def normalize(angle):
    """Reduce angle(s) to (-pi, pi]."""
    y = np.mod(np.asarray(angle, dtype=float) + math.pi, TWO_PI) - math.pi
    y = np.where(y <= -math.pi, y + TWO_PI, y)
    if np.ndim(y) == 0:
        return float(y)
    return y


def ccw_distance(a, b):
    """Counter-clockwise arc length from ``a`` to ``b``, in [0, 2pi)."""
    d = np.mod(np.asarray(b, dtype=float) - np.asarray(a, dtype=float), TWO_PI)
    if np.ndim(d) == 0:
        return float(d)
    return d


def circle_distance(a, b):
    """Unsigned distance on the circle, in [0, pi]."""
    d = ccw_distance(a, b)
    return np.minimum(d, TWO_PI - d) if np.ndim(d) else min(d, TWO_PI - d)


@dataclass(frozen=True)
class Arc:
    """Counter-clockwise arc ``[start, start + length)`` of the unit circle."""

    start: float
    length: float

    def __post_init__(self):
        if not (0.0 < self.length <= TWO_PI + 1e-12):
            raise ValueError(f"arc length must lie in (0, 2pi], got {self.length!r}")
        object.__setattr__(self, "start", normalize(self.start))

    @classmethod
    def between(cls, a: float, b: float) -> "Arc":
        """The arc running counter-clockwise from ``a`` to ``b``."""
        d = ccw_distance(a, b)
        return cls(a, d if d > 0 else TWO_PI)

    @property
    def end(self) -> float:
        return normalize(self.start + self.length)

    @property
    def midpoint(self) -> float:
        return normalize(self.start + 0.5 * self.length)

    def contains(self, x: float, tol: float = 0.0) -> bool:
        """Half-open membership; ``tol`` widens the arc on both sides."""
        d = ccw_distance(self.start - tol, x)
        return d < self.length + 2 * tol

    def contains_arc(self, other: "Arc", tol: float = 1e-12) -> bool:
        off = ccw_distance(self.start, other.start)
        if off > TWO_PI - tol:
            off -= TWO_PI
        return off >= -tol and off + other.length <= self.length + tol

    def overlap(self, other: "Arc") -> float:
        """Total length of the intersection (handles the two-component case)."""
        return _overlap_len(self.start, self.length, other.start, other.length)


def _overlap_len(s1, l1, s2, l2):
    # intersect [0, l1) with [o, o + l2) and its 2pi translate
    o = ccw_distance(s1, s2)
    first = max(0.0, min(l1, o + l2) - o)
    second = max(0.0, min(l1, o + l2 - TWO_PI))
    return first + second


# ---------------------------------------------------------------------------
# Mobius transformations of the disc


@dataclass(frozen=True)
class MobiusTransform:
    """``z -> (a z + conj(c)) / (c z + conj(a))`` with ``|a|^2 - |c|^2 = 1``.

    The pseudo-determinant is re-normalized to one on construction.
    """

    a: complex
    c: complex

    def __post_init__(self):
        a, c = complex(self.a), complex(self.c)
        det = abs(a) ** 2 - abs(c) ** 2
        if det <= 0:
            raise ValueError("not an orientation-preserving disc automorphism")
        s = math.sqrt(det)
        object.__setattr__(self, "a", a / s)
        object.__setattr__(self, "c", c / s)

    @classmethod
    def identity(cls) -> "MobiusTransform":
        return cls(1.0, 0.0)

    @classmethod
    def from_matrix(cls, m) -> "MobiusTransform":
        return cls(m[0, 0], m[1, 0])

    @property
    def matrix(self) -> np.ndarray:
        a, c = self.a, self.c
        return np.array([[a, c.conjugate()], [c, a.conjugate()]], dtype=complex)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = (self.a * z + self.c.conjugate()) / (self.c * z + self.a.conjugate())
        return complex(out) if out.ndim == 0 else out

    def apply_angle(self, x):
        """Action on the boundary in additive notation: ``arg T(e^{ix})``."""
        return normalize(np.angle(self(np.exp(1j * np.asarray(x, dtype=float)))))

    def derivative_modulus(self, z):
        """``|T'(z)|``; equals one exactly on the isometric circle."""
        z = np.asarray(z, dtype=complex)
        out = 1.0 / np.abs(self.c * z + self.a.conjugate()) ** 2
        return float(out) if out.ndim == 0 else out

    def compose(self, other: "MobiusTransform") -> "MobiusTransform":
        """``self o other``."""
        return MobiusTransform.from_matrix(self.matrix @ other.matrix)

    def __matmul__(self, other: "MobiusTransform") -> "MobiusTransform":
        return self.compose(other)

    def inverse(self) -> "MobiusTransform":
        return MobiusTransform(self.a.conjugate(), -self.c)


def mobius_apply(T: MobiusTransform, x):
    return T.apply_angle(x)


def mobius_compose(S: MobiusTransform, T: MobiusTransform) -> MobiusTransform:
    return S.compose(T)


def mobius_inverse(T: MobiusTransform) -> MobiusTransform:
    return T.inverse()


def mobius_derivative_modulus(T: MobiusTransform, x) -> float:
    return T.derivative_modulus(np.exp(1j * np.asarray(x, dtype=float)))


def projective_distance(m1, m2) -> float:
    """Entrywise max difference of two 2x2 matrices, up to global sign."""
    m1 = getattr(m1, "matrix", m1)
    m2 = getattr(m2, "matrix", m2)
    return float(min(np.max(np.abs(m1 - m2)), np.max(np.abs(m1 + m2))))


# ---------------------------------------------------------------------------
# index arithmetic


def n_sides(g: int) -> int:
    return 8 * g - 4


def wrap_index(k: int, modulus: int) -> int:
    """Representative of ``k`` in ``1..modulus``."""
    r = k % modulus
    return r if r else modulus


def _check_genus(g: int) -> None:
    if int(g) != g or g < 2:
        raise ValueError(f"genus must be an integer >= 2, got {g!r}")


def sigma(k: int, g: int) -> int:
    """Side pairing: side ``k`` is glued to side ``sigma(k)``."""
    _check_genus(g)
    n = n_sides(g)
    if not 1 <= k <= n:
        raise IndexError(f"side index {k} outside 1..{n}")
    return wrap_index(4 * g - k if k % 2 else 2 - k, n)


def rho(k: int, g: int) -> int:
    return wrap_index(sigma(k, g) + 1, n_sides(g))


def make_generator(g: int, k: int) -> MobiusTransform:
    """The generator ``T_k`` pairing side ``k`` with side ``sigma(k)``."""
    _check_genus(g)
    n = n_sides(g)
    if not 1 <= k <= n:
        raise IndexError(f"generator index {k} outside 1..{n}")
    alpha = TWO_PI / n
    root = math.sqrt(math.cos(alpha))
    # numerator e^{i(1-k)a} z + i*root, denominator -i*root z + e^{i(k-1)a};
    # the factor (-1)^{k+1} is absorbed as (a, c) -> (i a, -i c)
    a = np.exp(1j * (1 - k) * alpha)
    c = -1j * root
    if k % 2 == 0:
        a, c = 1j * a, -1j * c
    return MobiusTransform(complex(a), complex(c))


# ---------------------------------------------------------------------------
# the regular polygon


@dataclass(frozen=True)
class PolygonData:
    """Regular (8g-4)-gon: boundary points, vertices and generators.

    Arrays are 0-based (entry ``k-1`` belongs to index ``k``); use the
    accessor methods for cyclic 1-based lookups.
    """

    genus: int
    alpha: float
    P: np.ndarray
    Q: np.ndarray
    C: np.ndarray
    V: np.ndarray
    T: tuple = field(repr=False)

    @property
    def n(self) -> int:
        return n_sides(self.genus)

    def idx(self, k: int) -> int:
        return wrap_index(k, self.n)

    def p(self, k: int) -> float:
        return float(self.P[self.idx(k) - 1])

    def q(self, k: int) -> float:
        return float(self.Q[self.idx(k) - 1])

    def c(self, k: int) -> float:
        return float(self.C[self.idx(k) - 1])

    def v(self, k: int) -> complex:
        return complex(self.V[self.idx(k) - 1])

    def gen(self, k: int) -> MobiusTransform:
        return self.T[self.idx(k) - 1]

    def gen_inv(self, k: int) -> MobiusTransform:
        return self.T[self.idx(k) - 1].inverse()

    def sigma(self, k: int) -> int:
        return sigma(self.idx(k), self.genus)

    def rho(self, k: int) -> int:
        return rho(self.idx(k), self.genus)

    def boundary_points(self) -> np.ndarray:
        """``P_1, Q_1, P_2, Q_2, ...`` in counter-clockwise order."""
        out = np.empty(2 * self.n)
        out[0::2] = self.P
        out[1::2] = self.Q
        return out


def _circle_intersection(c1: complex, r1: float, c2: complex, r2: float):
    d = abs(c2 - c1)
    a = (r1 * r1 - r2 * r2 + d * d) / (2 * d)
    h = math.sqrt(max(r1 * r1 - a * a, 0.0))
    u = (c2 - c1) / d
    base = c1 + a * u
    return base + 1j * h * u, base - 1j * h * u


def make_polygon(g: int) -> PolygonData:
    """Assemble the regular (8g-4)-gon for genus ``g``."""
    _check_genus(g)
    n = n_sides(g)
    alpha = TWO_PI / n
    gens = tuple(make_generator(g, k) for k in range(1, n + 1))

    P = np.empty(n)
    Q = np.empty(n)
    for k, T in enumerate(gens, start=1):
        # unit-modulus solutions of |c z + conj(a)| = 1: the isometric circle's feet
        centre = -T.a.conjugate() / T.c
        radius = 1.0 / abs(T.c)
        z1, z2 = _circle_intersection(0j, 1.0, centre, radius)
        t1, t2 = float(np.angle(z1)), float(np.angle(z2))
        # the side runs along the shorter arc, P_k first counter-clockwise
        if ccw_distance(t1, t2) < math.pi:
            pk, qk1 = t1, t2
        else:
            pk, qk1 = t2, t1
        P[k - 1] = normalize(pk)
        Q[k % n] = normalize(qk1)

    C = normalize(alpha * (np.arange(1, n + 1) - 2 * g))

    V = np.empty(n, dtype=complex)
    for k in range(1, n + 1):
        Ta, Tb = gens[(k - 2) % n], gens[k - 1]
        pts = _circle_intersection(
            -Ta.a.conjugate() / Ta.c, 1.0 / abs(Ta.c),
            -Tb.a.conjugate() / Tb.c, 1.0 / abs(Tb.c),
        )
        inside = [z for z in pts if abs(z) < 1.0]
        if len(inside) != 1:
            raise GeometryError(f"sides {k - 1} and {k} do not meet inside the disc")
        V[k - 1] = inside[0]

    poly = PolygonData(genus=g, alpha=alpha, P=P, Q=Q, C=C, V=V, T=gens)
    _check_ordering(poly)
    return poly


def _check_ordering(poly: PolygonData) -> None:
    pts = poly.boundary_points()
    steps = ccw_distance(pts, np.roll(pts, -1))
    if np.any(steps <= 0) or abs(steps.sum() - TWO_PI) > 1e-9:
        raise GeometryError("boundary points are not in the order P1, Q1, P2, Q2, ...")


# ---------------------------------------------------------------------------
# identity residuals (used by tests and the verify command)


def shift_identity_defect(poly: PolygonData, xs: Sequence[float]) -> float:
    """max |T_k(x + alpha) - T_{k-1}(x) - (4g-3) alpha| over k and samples."""
    beta = (4 * poly.genus - 3) * poly.alpha
    xs = np.asarray(xs, dtype=float)
    worst = 0.0
    for k in range(1, poly.n + 1):
        lhs = poly.gen(k).apply_angle(xs + poly.alpha)
        rhs = poly.gen(k - 1).apply_angle(xs) + beta
        worst = max(worst, float(np.max(circle_distance(lhs, rhs))))
    return worst


def central_symmetry_defect(poly: PolygonData, xs: Sequence[float]) -> float:
    """max |T_k(C_k + x) + T_k(C_k - x) + 2 C_k| (as a circle distance to 0)."""
    xs = np.asarray(xs, dtype=float)
    worst = 0.0
    for k in range(1, poly.n + 1):
        ck = poly.c(k)
        T = poly.gen(k)
        s = T.apply_angle(ck + xs) + T.apply_angle(ck - xs) + 2 * ck
        worst = max(worst, float(np.max(circle_distance(s, 0.0))))
    return worst


def oddness_defect(poly: PolygonData, xs: Sequence[float]) -> float:
    """max |T_k(-x) + T_{4g-k}(x)| over k and samples."""
    xs = np.asarray(xs, dtype=float)
    worst = 0.0
    for k in range(1, poly.n + 1):
        s = poly.gen(k).apply_angle(-xs) + poly.gen(4 * poly.genus - k).apply_angle(xs)
        worst = max(worst, float(np.max(circle_distance(s, 0.0))))
    return worst


def quaternary_defect(poly: PolygonData) -> float:
    """max over k of the distance of T_{rho^3 k} T_{rho^2 k} T_{rho k} T_k from +-Id."""
    worst = 0.0
    eye = np.eye(2)
    for k in range(1, poly.n + 1):
        ks = [k]
        for _ in range(3):
            ks.append(poly.rho(ks[-1]))
        m = eye.astype(complex)
        for j in ks:
            m = poly.gen(j).matrix @ m
        worst = max(worst, projective_distance(m, eye))
    return worst


def inverse_pair_defect(poly: PolygonData) -> float:
    worst = 0.0
    for k in range(1, poly.n + 1):
        m = poly.gen(poly.sigma(k)).matrix @ poly.gen(k).matrix
        worst = max(worst, projective_distance(m, np.eye(2)))
    return worst


def vertex_cycle_defect(poly: PolygonData) -> float:
    """max |T_k(V_k) - V_{rho(k)}|."""
    return max(
        abs(poly.gen(k)(poly.v(k)) - poly.v(poly.rho(k))) for k in range(1, poly.n + 1)
    )
