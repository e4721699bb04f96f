"""Cylinder intervals, symbolic coding, and the P-to-Q cylinder recoding.

A word is a tuple of Markov symbols.  Its P-cylinder (resp. Q-cylinder) is
the set of points whose ``f_P`` (resp. ``f_Q``) itinerary through the
Markov partition starts with that word.  Every P-cylinder of rank ``n+1``
is a union of Q-cylinders of rank ``n+2``; :func:`recode_P_to_Q` builds
that union symbolically and :func:`q_words_meeting` finds it by brute
force for comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .boundary import ParameterChoice, make_parameters
from .geometry import (
    TWO_PI,
    Arc,
    MobiusTransform,
    PolygonData,
    ccw_distance,
    make_polygon,
    projective_distance,
    sigma,
    wrap_index,
)
from .markov import (
    closed_form_eigenvectors,
    closed_form_lambda,
    is_admissible,
    n_symbols,
    partition_endpoints,
    successors,
    transition_matrix,
    wrap_symbol,
)

P, Q = "P", "Q"


class InadmissibleWordError(ValueError):
    pass


class BoundaryAmbiguityError(ValueError):
    """An orbit point landed within tolerance of a partition endpoint."""


class RecodingError(RuntimeError):
    pass


@dataclass(frozen=True)
class CylinderWord:
    symbols: tuple
    flavor: str = P

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(int(s) for s in self.symbols))
        if self.flavor not in (P, Q):
            raise ValueError("flavor must be 'P' or 'Q'")

    def __len__(self):
        return len(self.symbols)


@lru_cache(maxsize=None)
def flavor_matrix(g: int, flavor: str) -> np.ndarray:
    M = transition_matrix(g, flavor * (8 * g - 4))
    M.setflags(write=False)
    return M


def generator_for_symbol(g: int, symbol: int, flavor: str) -> int:
    """Generator acting on ``I_symbol``: ceiling of half for ``f_P``, floor for ``f_Q``."""
    half = (symbol + 1) // 2 if flavor == P else symbol // 2
    return wrap_index(half, 8 * g - 4)


def _check_word(g: int, word: Sequence[int], flavor: str) -> None:
    if len(word) == 0:
        raise InadmissibleWordError("empty word")
    m = n_symbols(g)
    if any(not 1 <= s <= m for s in word):
        raise InadmissibleWordError(f"symbols must lie in 1..{m}")
    if not is_admissible(flavor_matrix(g, flavor), word):
        raise InadmissibleWordError(f"{tuple(word)} is not {flavor}-admissible")


@lru_cache(maxsize=None)
def _inverse_matrices(g: int) -> np.ndarray:
    poly = make_polygon(g)
    return np.stack([poly.gen_inv(k).matrix for k in range(1, poly.n + 1)])


def _apply(m: np.ndarray, x):
    z = np.exp(1j * np.asarray(x, dtype=float))
    return np.angle((m[..., 0, 0] * z + m[..., 0, 1]) / (m[..., 1, 0] * z + m[..., 1, 1]))


def cylinder_transform(g: int, word: Sequence[int], flavor: str) -> np.ndarray:
    """Matrix of ``T^-1_{w_0} o ... o T^-1_{w_{n-1}}`` (generator indices per flavor)."""
    inv = _inverse_matrices(g)
    G = np.eye(2, dtype=complex)
    for s in word[:-1]:
        G = G @ inv[generator_for_symbol(g, s, flavor) - 1]
    return G


def cylinder_endpoints(polygon: PolygonData, word: Sequence[int], flavor: str) -> tuple:
    starts, ends = partition_endpoints(polygon)
    G = cylinder_transform(polygon.genus, word, flavor)
    last = word[-1] - 1
    return float(_apply(G, starts[last])), float(_apply(G, ends[last]))


def cylinder_interval(polygon: PolygonData, word, flavor: str = None) -> Arc:
    """Arc of the P- or Q-cylinder of an admissible word."""
    if isinstance(word, CylinderWord):
        flavor = word.flavor if flavor is None else flavor
        word = word.symbols
    flavor = flavor or P
    word = tuple(word)
    _check_word(polygon.genus, word, flavor)
    a, b = cylinder_endpoints(polygon, word, flavor)
    return Arc.between(a, b)


def _intersect(a: Arc, b: Arc, tol: float = 1e-13):
    """Intersection of two arcs when it is a single arc; ``None`` if empty."""
    pieces = []
    for first, second in ((a, b), (b, a)):
        off = ccw_distance(first.start, second.start)
        if off < first.length:
            length = min(first.length - off, second.length)
            if length > tol:
                pieces.append((second.start, length))
    if not pieces:
        return None
    if len(pieces) == 2 and abs(pieces[0][0] - pieces[1][0]) > tol and a.length + b.length < TWO_PI:
        raise ValueError("arc intersection has two components")
    start, length = max(pieces, key=lambda p: p[1])
    return Arc(start, length)


def cylinder_by_preimage(params: ParameterChoice, word: Sequence[int]):
    """``I_{w0} & f^-1(I_{w1}) & ... & f^-n(I_{wn})`` by explicit arc intersections.

    Returns ``None`` when the intersection is empty.
    """
    poly = params.polygon
    starts, ends = partition_endpoints(poly)
    J = Arc.between(starts[word[-1] - 1], ends[word[-1] - 1])
    for s in reversed(word[:-1]):
        Tinv = poly.gen_inv(params.acting_generator(s))
        pre = Arc.between(Tinv.apply_angle(J.start), Tinv.apply_angle(J.end))
        J = _intersect(Arc.between(starts[s - 1], ends[s - 1]), pre)
        if J is None:
            return None
    return J


def code_point(params: ParameterChoice, x: float, n: int, tol: float = 1e-12) -> CylinderWord:
    """First ``n+1`` symbols of the itinerary of ``x`` under an extremal map.

    Raises :class:`BoundaryAmbiguityError` if an iterate (after the first)
    lands within ``tol`` of a partition endpoint.
    """
    from .markov import locate_symbol

    if not params.is_extremal:
        raise ValueError("symbolic coding needs an extremal parameter choice")
    poly = params.polygon
    pts = poly.boundary_points()
    flavor = Q if params.kind == "Q-extremal" else P
    y = float(x)
    symbols = []
    for step in range(n + 1):
        if step > 0:
            gap = np.min(np.minimum(ccw_distance(y, pts), ccw_distance(pts, y)))
            if gap < tol:
                raise BoundaryAmbiguityError(f"iterate {step} of {x!r} sits on a partition endpoint")
        s = locate_symbol(poly, y)
        symbols.append(s)
        y = poly.gen(params.acting_generator(s)).apply_angle(y)
    return CylinderWord(tuple(symbols), flavor)


# ---------------------------------------------------------------------------
# generator relations and admissibility helpers


def check_generator_relation(polygon: PolygonData, k: int) -> float:
    """Residual of ``T_k^-1 T_{s+1}^-1 = T_{k-1}^-1 T_{s+4g-2}^-1`` with ``s = sigma(k)``."""
    g = polygon.genus
    s = polygon.sigma(k)
    lhs = polygon.gen_inv(k).matrix @ polygon.gen_inv(s + 1).matrix
    rhs = polygon.gen_inv(k - 1).matrix @ polygon.gen_inv(s + 4 * g - 2).matrix
    return projective_distance(lhs, rhs)


def check_inductive_relation(polygon: PolygonData, k: int, m: int) -> float:
    """Residual of ``T_k^-1 (T_{s+1}^-1 T_{k+4g-1}^-1)^m = (T_{k-1}^-1 T_{s+4g-3}^-1)^m T_k^-1``.

    Entries grow like ``lambda^m``, so the residual is scaled by the largest
    entry to stay comparable across ``m``.
    """
    if m < 0:
        raise ValueError("m must be non-negative")
    g = polygon.genus
    s = polygon.sigma(k)
    left_step = polygon.gen_inv(s + 1).matrix @ polygon.gen_inv(k + 4 * g - 1).matrix
    right_step = polygon.gen_inv(k - 1).matrix @ polygon.gen_inv(s + 4 * g - 3).matrix
    lhs = polygon.gen_inv(k).matrix @ np.linalg.matrix_power(left_step, m)
    rhs = np.linalg.matrix_power(right_step, m) @ polygon.gen_inv(k).matrix
    if m == 0:
        lhs = rhs = np.eye(2)
    return projective_distance(lhs, rhs) / max(1.0, float(np.max(np.abs(lhs))))


def _cyclic_range(g: int, first: int, last: int) -> list:
    """Symbols ``first, first+1, ..., last`` read cyclically mod ``16g-8``."""
    m = n_symbols(g)
    count = (last - first) % m + 1
    return [wrap_symbol(first + t, g) for t in range(count)]


def admissibility_families(g: int, k: int) -> dict:
    """The three word families of the admissibility lemma for index ``k``.

    Returns ``{part: (words, excluded_words)}`` where ``excluded_words`` use
    the symbols just outside the stated range of the free last letter.  In
    parts (a) and (b) the range is every successor of the previous letter,
    so the excluded words are inadmissible.  Part (c) lists only two of the
    successors, so its excluded words stay admissible and are not a control.
    """
    s = sigma(k, g)
    w = lambda i: wrap_symbol(i, g)
    fam = {}
    ells = _cyclic_range(g, 2 * k + 8 * g, 2 * k + 8 * g - 8)
    prefix = (w(2 * k - 1), w(2 * s + 8 * g - 4))
    fam["a"] = (prefix, ells, [w(2 * k + 8 * g - 1), w(2 * k + 8 * g - 7)])
    ells = _cyclic_range(g, 2 * s + 4, 2 * s - 4)
    prefix = (w(2 * k - 1), w(2 * s + 8 * g - 5), w(2 * k))
    fam["b"] = (prefix, ells, [w(2 * s + 3), w(2 * s - 3)])
    ells = [w(2 * k + 8 * g - 9), w(2 * k + 8 * g - 8)]
    prefix = (w(2 * k - 1), w(2 * s + 8 * g - 5), w(2 * k - 1), w(2 * s + 8 * g - 4))
    fam["c"] = (prefix, ells, [w(2 * k + 8 * g - 10), w(2 * k + 8 * g - 7)])
    return {
        part: ([prefix + (l,) for l in ells], [prefix + (l,) for l in outside])
        for part, (prefix, ells, outside) in fam.items()
    }


def check_admissibility_lemma(g: int) -> dict:
    """Check every word of the three families against ``M_Q``; also run negative controls."""
    MQ = flavor_matrix(g, Q)
    failures = []
    controls_failed = []
    checked = 0
    for k in range(1, 8 * g - 3):
        for part, (words, outside) in admissibility_families(g, k).items():
            for word in words:
                checked += 1
                if not is_admissible(MQ, word):
                    failures.append((part, k, word))
            if part == "c":
                continue
            for word in outside:
                if is_admissible(MQ, word):
                    controls_failed.append((part, k, word))
    return {
        "genus": g,
        "checked": checked,
        "failures": failures,
        "controls_admissible": controls_failed,
        "ok": not failures and not controls_failed,
    }


# ---------------------------------------------------------------------------
# P -> Q recoding


def recode_P_to_Q(g: int, omega: Sequence[int]) -> list:
    """Q-words of rank ``len(omega)+1`` whose cylinders tile the P-cylinder of ``omega``."""
    omega = tuple(int(s) for s in omega)
    _check_word(g, omega, P)
    return [tuple(w) for w in _recode(g, omega)]


def _recode(g: int, omega: tuple) -> list:
    w = lambda i: wrap_symbol(i, g)
    first = omega[0]
    if len(omega) == 1:
        return [(first, j) for j in successors(g, first, Q)]
    if first % 2 == 0:
        # even rows of M_P and M_Q agree, so the leading symbol carries over
        return [(first,) + xi for xi in _recode(g, omega[1:])]

    k = (first + 1) // 2
    s = sigma(k, g)
    if len(omega) == 2:
        if omega[1] == w(2 * s + 3):
            return [(first, w(2 * s + 8 * g - 4), w(2 * k + 8 * g - 9)),
                    (first, w(2 * s + 8 * g - 4), w(2 * k + 8 * g - 8))]
        # the rest of I_{2k-1} once (2k-1, 2s+3) is removed
        head = [(first, w(2 * s + 8 * g - 5), first), (first, w(2 * s + 8 * g - 5), w(2 * k))]
        tail = [(first, w(2 * s + 8 * g - 4), l)
                for l in _cyclic_range(g, 2 * k + 8 * g, 2 * k + 8 * g - 10)]
        return head + tail
    lifted = [eta for xi in _recode(g, omega[1:]) for eta in _lift_odd(g, k, xi)]
    return _merge_to_rank(g, lifted, len(omega) + 1)


def _lift_odd(g: int, k: int, xi: tuple) -> list:
    """Q-words whose cylinders tile ``T_k^-1(I_Q(xi))``.

    ``xi`` starts with ``2s+2`` or ``2s+3`` (``s = sigma(k)``).  The rewrite
    walks along ``xi`` using two generator relations: a pending ``T_k^-1``
    followed by a letter acting by ``T_{s+1}`` becomes a pending
    ``T_k^-1 T_{s+1}^-1``; that in turn either absorbs a letter acting by
    ``T_{k+4g-1}`` (emitting ``2k-1, 2s+8g-5`` and going back to a pending
    ``T_k^-1``) or is rewritten as ``T_{k-1}^-1 T_{s+4g-2}^-1``.

    When ``xi`` ends while a relation is still pending, the last interval is
    split further and the pieces come back one rank too fine; the caller
    merges them.
    """
    n = 8 * g - 4
    s = sigma(k, g)
    w = lambda i: wrap_symbol(i, g)
    gen_s1 = wrap_index(s + 1, n)
    gen_k4 = wrap_index(k + 4 * g - 1, n)
    pair = (w(2 * k - 1), w(2 * s + 8 * g - 5))
    cross = (w(2 * k - 1), w(2 * s + 8 * g - 4))

    def run(out: tuple, pending_s1: bool, word: tuple) -> list:
        for i, sym in enumerate(word):
            last = i == len(word) - 1
            acting = generator_for_symbol(g, sym, Q)
            if not pending_s1:
                if acting != gen_s1:
                    return [out + (w(2 * k),) + word[i:]]
                if last:
                    # T_k^-1(I_sym) is the P-cylinder (2k-1, sym)
                    return [out + eta for eta in _recode(g, (w(2 * k - 1), sym))]
                pending_s1 = True
                continue
            if acting != gen_k4:
                return [out + cross + word[i:]]
            if last:
                return [piece for j in successors(g, sym, Q) for piece in run(out + pair, False, (j,))]
            out += pair
            pending_s1 = False
        raise RecodingError(f"cannot lift {xi} through T_{k}^-1")

    return run((), False, tuple(xi))


def _merge_to_rank(g: int, words: list, rank: int) -> list:
    """Replace complete sibling groups by their parent until no word is longer than ``rank``."""
    words = set(words)
    while True:
        longest = max(len(x) for x in words)
        if longest <= rank:
            return sorted(words)
        deep = [x for x in words if len(x) == longest]
        for parent in {x[:-1] for x in deep}:
            children = {parent + (j,) for j in successors(g, parent[-1], Q)}
            if not children <= words:
                raise RecodingError(f"children of {parent} only partly present")
            words -= children
            words.add(parent)


def q_words_meeting(polygon: PolygonData, target: Arc, rank: int, tol: float = 1e-12) -> list:
    """All Q-admissible words of the given rank whose cylinders overlap ``target``.

    Depth-first search over ``M_Q`` that prunes any prefix whose cylinder is
    (numerically) disjoint from the target.
    """
    g = polygon.genus
    starts, ends = partition_endpoints(polygon)
    inv = _inverse_matrices(g)
    found = []

    def overlap(G, j):
        a = float(_apply(G, starts[j - 1]))
        b = float(_apply(G, ends[j - 1]))
        return target.overlap(Arc.between(a, b))

    def dfs(word, G):
        if len(word) == rank:
            found.append(tuple(word))
            return
        G2 = G @ inv[generator_for_symbol(g, word[-1], Q) - 1]
        for j in successors(g, word[-1], Q):
            if overlap(G2, j) > tol:
                dfs(word + [j], G2)

    eye = np.eye(2, dtype=complex)
    for i in range(1, n_symbols(g) + 1):
        if overlap(eye, i) > tol:
            dfs([i], eye)
    return sorted(found)


def _tiles(polygon: PolygonData, target: Arc, words: list, flavor: str, tol: float) -> bool:
    arcs = []
    for word in words:
        a, b = cylinder_endpoints(polygon, word, flavor)
        off = ccw_distance(target.start, a)
        if off > TWO_PI - tol:
            off -= TWO_PI
        arcs.append((off, ccw_distance(a, b)))
    arcs.sort()
    pos = 0.0
    for off, length in arcs:
        if abs(off - pos) > tol:
            return False
        pos = off + length
    return abs(pos - target.length) <= tol


def q_cylinder_measure(g: int, word: Sequence[int]) -> float:
    lam = closed_form_lambda(g)
    v, p = closed_form_eigenvectors(g)
    a, b = word[0] - 1, word[-1] - 1
    return float(p[a] * v[b] / (lam ** (len(word) - 1) * v[a]))


@dataclass
class RecodingReport:
    omega: tuple
    q_words: list
    measure_P: float
    measure_Q_sum: float
    union_ok: bool
    oracle_ok: bool
    counts_ok: bool
    extra: dict = field(default_factory=dict)

    @property
    def measure_ok(self) -> bool:
        return abs(self.measure_P - self.measure_Q_sum) <= 1e-10

    @property
    def ok(self) -> bool:
        return self.union_ok and self.oracle_ok and self.counts_ok and self.measure_ok

    def as_dict(self) -> dict:
        return {
            "omega": list(self.omega),
            "q_words": [list(w) for w in self.q_words],
            "measure_P": self.measure_P,
            "measure_Q_sum": self.measure_Q_sum,
            "union_ok": self.union_ok,
            "oracle_ok": self.oracle_ok,
            "counts_ok": self.counts_ok,
            "measure_ok": self.measure_ok,
        }


def verify_recoding(polygon, omega: Sequence[int], tol: float = 1e-9, oracle: bool = True) -> RecodingReport:
    """Check the recoding of one P-word: tiling, measure, counts and the brute-force set."""
    if isinstance(polygon, int):
        polygon = make_polygon(polygon)
    g = polygon.genus
    omega = tuple(omega)
    words = recode_P_to_Q(g, omega)
    target = cylinder_interval(polygon, omega, P)
    union_ok = _tiles(polygon, target, words, Q, tol) and all(
        is_admissible(flavor_matrix(g, Q), w) for w in words
    )
    if oracle:
        oracle_words = q_words_meeting(polygon, target, len(omega) + 1)
        oracle_ok = oracle_words == sorted(words)
    else:
        oracle_ok = True

    finals = [w[-1] for w in words]
    n_even = sum(1 for f in finals if f % 2 == 0)
    if omega[-1] % 2:
        counts_ok = len(words) == 2 and n_even == 1
    else:
        counts_ok = len(words) == 16 * g - 15 and n_even == 8 * g - 7
    report = RecodingReport(
        omega=omega,
        q_words=words,
        measure_P=q_cylinder_measure(g, omega),
        measure_Q_sum=math.fsum(q_cylinder_measure(g, w) for w in words),
        union_ok=union_ok,
        oracle_ok=oracle_ok,
        counts_ok=counts_ok,
    )
    if omega[-1] % 2 and len(words) == 2:
        v, _ = closed_form_eigenvectors(g)
        report.extra["final_v_sum"] = float(v[finals[0] - 1] + v[finals[1] - 1])
        report.extra["lambda_c"] = closed_form_lambda(g) * float(v[0])
    return report


def admissible_words(g: int, length: int, flavor: str = P):
    """Generate every admissible word of the given length in lexicographic order."""
    M = flavor_matrix(g, flavor)
    m = M.shape[0]

    def extend(word):
        if len(word) == length:
            yield tuple(word)
            return
        for j in range(1, m + 1):
            if M[word[-1] - 1, j - 1]:
                yield from extend(word + [j])

    for i in range(1, m + 1):
        yield from extend([i])


def max_cylinder_length(polygon: PolygonData, rank: int, flavor: str = P) -> float:
    return max(cylinder_interval(polygon, w, flavor).length for w in admissible_words(polygon.genus, rank, flavor))
