"""The generalized Bowen-Series boundary maps ``f_A``.

``f_A`` acts by the generator ``T_k`` on the half-open arc ``[A_k, A_{k+1})``,
where each break point ``A_k`` is chosen in the arc ``[P_k, Q_k]``.
"""

from __future__ import annotations

import bisect
import math
import re
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .geometry import TWO_PI, Arc, PolygonData, ccw_distance, normalize

P_EXTREMAL = "P-extremal"
Q_EXTREMAL = "Q-extremal"
EXTREMAL = "extremal-bitmask"
GENERAL = "general"


@dataclass(frozen=True)
class ParameterChoice:
    """Break points ``A_1..A_{8g-4}`` of a boundary map.

    ``mask`` records, for extremal choices, which endpoint each ``A_k`` sits
    on (``"P"`` or ``"Q"``); it is ``None`` for general choices.
    """

    polygon: PolygonData
    A: np.ndarray
    kind: str
    mask: tuple = None
    label: str = ""

    def __post_init__(self):
        A = normalize(np.asarray(self.A, dtype=float))
        object.__setattr__(self, "A", A)
        poly = self.polygon
        if A.shape != (poly.n,):
            raise ValueError(f"expected {poly.n} break points, got {A.shape}")
        for k in range(1, poly.n + 1):
            width = ccw_distance(poly.p(k), poly.q(k))
            off = ccw_distance(poly.p(k), A[k - 1])
            if off > width + 1e-12 and off < TWO_PI - 1e-12:
                raise ValueError(f"A_{k} lies outside [P_{k}, Q_{k}]")
        # rotate into a window starting at A_1 for branch lookup
        offsets = ccw_distance(A[0], A)
        offsets[0] = 0.0
        if np.any(np.diff(offsets) <= 0):
            raise ValueError("break points are not in counter-clockwise order")
        object.__setattr__(self, "_offsets", offsets)

    @property
    def genus(self) -> int:
        return self.polygon.genus

    @property
    def is_extremal(self) -> bool:
        return self.mask is not None

    def branch(self, x: float) -> int:
        """Index ``k`` with ``x`` in ``[A_k, A_{k+1})``."""
        d = ccw_distance(self.A[0], x)
        return bisect.bisect_right(self._offsets, d)

    def branches(self, xs) -> np.ndarray:
        d = ccw_distance(self.A[0], np.asarray(xs, dtype=float))
        return np.searchsorted(self._offsets, d, side="right")

    def branch_arc(self, k: int) -> Arc:
        n = self.polygon.n
        return Arc.between(self.A[(k - 1) % n], self.A[k % n])

    def acting_generator(self, k: int) -> int:
        """Generator acting on Markov interval ``I_k`` (extremal choices only)."""
        if not self.is_extremal:
            raise ValueError("Markov intervals are defined for extremal parameters only")
        n = self.polygon.n
        if k % 2 == 0:
            return k // 2
        j = (k + 1) // 2
        return j if self.mask[j - 1] == "P" else (j - 2) % n + 1


ParameterSpec = Union[str, Sequence]


def make_parameters(polygon: PolygonData, spec, seed=None) -> ParameterChoice:
    """Build a parameter choice from a spec.

    ``spec`` may be ``"all-P"``, ``"all-Q"``, a string ``"bitmask:PQ..."``,
    ``"fractions:t1,t2,..."``, ``"random"`` (uses ``seed``), or directly a
    sequence of ``"P"``/``"Q"`` letters or of fractions in [0, 1].
    """
    n = polygon.n
    if isinstance(spec, str):
        s = spec.strip()
        if s in ("all-P", "P"):
            return _extremal(polygon, ("P",) * n, P_EXTREMAL, "all-P")
        if s in ("all-Q", "Q"):
            return _extremal(polygon, ("Q",) * n, Q_EXTREMAL, "all-Q")
        if s.startswith("bitmask:"):
            return make_parameters(polygon, tuple(s.split(":", 1)[1]))
        if s.startswith("fractions:"):
            ts = [float(t) for t in s.split(":", 1)[1].split(",")]
            return make_parameters(polygon, ts)
        if s == "random":
            return random_parameters(polygon, seed)
        raise ValueError(f"unrecognised parameter spec {spec!r}")

    items = list(spec)
    if len(items) != n:
        raise ValueError(f"expected {n} entries, got {len(items)}")
    if all(isinstance(t, str) for t in items):
        mask = tuple(t.upper() for t in items)
        if not set(mask) <= {"P", "Q"}:
            raise ValueError("bitmask entries must be 'P' or 'Q'")
        if set(mask) == {"P"}:
            return _extremal(polygon, mask, P_EXTREMAL, "all-P")
        if set(mask) == {"Q"}:
            return _extremal(polygon, mask, Q_EXTREMAL, "all-Q")
        return _extremal(polygon, mask, EXTREMAL, "bitmask:" + "".join(mask))
    ts = np.asarray(items, dtype=float)
    if np.any(ts < 0) or np.any(ts > 1):
        raise ValueError("fractions must lie in [0, 1]")
    if np.all((ts == 0) | (ts == 1)):
        return make_parameters(polygon, tuple("Q" if t else "P" for t in ts))
    widths = ccw_distance(polygon.P, polygon.Q)
    A = np.where(ts == 1, polygon.Q, polygon.P + ts * widths)
    label = "fractions:" + ",".join(f"{t:.6g}" for t in ts)
    return ParameterChoice(polygon, A, GENERAL, None, label)


def _extremal(polygon, mask, kind, label):
    A = np.array([polygon.P[k] if m == "P" else polygon.Q[k] for k, m in enumerate(mask)])
    return ParameterChoice(polygon, A, kind, tuple(mask), label)


def random_parameters(polygon: PolygonData, seed=None) -> ParameterChoice:
    rng = np.random.default_rng(seed)
    ts = rng.uniform(0.0, 1.0, polygon.n)
    pc = make_parameters(polygon, ts)
    return ParameterChoice(polygon, pc.A, GENERAL, None, f"random(seed={seed})")


def random_extremal(polygon: PolygonData, seed=None) -> ParameterChoice:
    rng = np.random.default_rng(seed)
    mask = tuple(rng.choice(["P", "Q"], polygon.n))
    pc = make_parameters(polygon, mask)
    return ParameterChoice(polygon, pc.A, pc.kind, pc.mask, f"random-extremal(seed={seed})")


def mask_from_int(n: int, bits: int) -> tuple:
    """Bit ``k-1`` of ``bits`` set means ``A_k = Q_k``."""
    return tuple("Q" if bits >> k & 1 else "P" for k in range(n))


_SPEC_RE = re.compile(r"^(all-P|all-Q|bitmask:[PQpq]+|fractions:[-0-9.,eE+]+|random(-extremal)?:\d+)$")


def parse_spec_list(polygon: PolygonData, text: str, seed: int = 0) -> list:
    """Expand a command-line spec (``random:N`` and ``random-extremal:N`` expand to N choices)."""
    out = []
    for part in text.split(";"):
        part = part.strip()
        if not _SPEC_RE.match(part):
            raise ValueError(f"bad parameter spec {part!r}")
        if part.startswith("random-extremal:"):
            count = int(part.split(":")[1])
            out.extend(random_extremal(polygon, seed + i) for i in range(count))
        elif part.startswith("random:"):
            count = int(part.split(":")[1])
            out.extend(random_parameters(polygon, seed + i) for i in range(count))
        else:
            out.append(make_parameters(polygon, part))
    return out


# ---------------------------------------------------------------------------
# dynamics


def eval_map(params: ParameterChoice, x: float):
    """``(f_A(x), k)`` where ``k`` is the branch containing ``x``."""
    k = params.branch(x)
    return params.polygon.gen(k).apply_angle(x), k


def eval_many(params: ParameterChoice, xs) -> tuple:
    xs = np.asarray(xs, dtype=float)
    ks = params.branches(xs)
    ys = np.empty_like(xs)
    for k in np.unique(ks):
        sel = ks == k
        ys[sel] = params.polygon.gen(int(k)).apply_angle(xs[sel])
    return ys, ks


def iterate(params: ParameterChoice, x: float, n: int):
    """``(f_A^n(x), [k_0, ..., k_{n-1}])``."""
    if n < 0:
        raise ValueError("number of steps must be non-negative")
    word = []
    y = normalize(x)
    for _ in range(n):
        y, k = eval_map(params, y)
        word.append(k)
    return y, word


def boundary_image_defect(params: ParameterChoice) -> float:
    """Largest distance from ``f(P_k)``, ``f(Q_k)`` to the set of P and Q points."""
    pts = params.polygon.boundary_points()
    worst = 0.0
    for x in pts:
        y, _ = eval_map(params, float(x))
        worst = max(worst, float(np.min(np.minimum(ccw_distance(y, pts), ccw_distance(pts, y)))))
    return worst


def total_branch_length(params: ParameterChoice) -> float:
    return math.fsum(params.branch_arc(k).length for k in range(1, params.polygon.n + 1))
