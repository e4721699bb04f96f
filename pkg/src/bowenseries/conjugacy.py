"""The constant-slope conjugacy ``psi`` of an extremal boundary map.

``psi(x)`` is ``2 pi`` times the measure of the arc from ``0`` to ``x``,
read through the symbolic coding, so ``psi(0) = 0`` and ``psi`` winds once
around the circle.  The default measure gives the cylinder of
``(w_0, ..., w_n)`` the mass ``v_{w_n} / lambda^n``.  ``f`` maps that
cylinder onto the cylinder of ``(w_1, ..., w_n)``, which has exactly
``lambda`` times the mass, so ``psi f psi^-1`` has slope ``lambda``.  The
Parry measure ``p_{w_0} v_{w_n} / (lambda^n v_{w_0})`` is available as
``measure="parry"``.  It gives the same ``psi`` for ``f_P`` and ``f_Q``, but
its ratio ``p_i / v_i`` differs between odd and even ``i``, so it does not
straighten the slope.

Two evaluators are provided:

* :class:`PsiTable` holds the endpoints of every cylinder whose measure
  has dropped below ``epsilon``.  At those breakpoints the value is an exact
  finite sum of cylinder measures; in between it interpolates linearly.
* :func:`measure_cdf` evaluates the measure at arbitrary points by following
  the orbit and summing the measures of the cylinders passed on the left
  at each level.  It is accurate to about ``1e-15`` and serves as the
  oracle for the table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .boundary import ParameterChoice, make_parameters
from .geometry import TWO_PI, ccw_distance, circle_distance, normalize, sigma
from .markov import closed_form_eigenvectors, closed_form_lambda, n_symbols, partition_endpoints, successors


MEASURES = ("conformal", "parry")


class ResolutionError(MemoryError):
    """The requested resolution needs more cylinders than the node budget allows."""


# ---------------------------------------------------------------------------
# symbolic bookkeeping shared by both evaluators


@dataclass(frozen=True)
class _Coding:
    """Per-symbol tables for the Markov coding of one extremal map."""

    params: ParameterChoice
    lam: float
    v: np.ndarray
    p: np.ndarray
    gens: np.ndarray  # forward generator matrices acting on each symbol
    gens_inv: np.ndarray
    succ: np.ndarray  # padded successor table, -1 past the end
    n_succ: np.ndarray
    before: np.ndarray  # before[s, j] = sum of v over successors of s preceding j
    total: np.ndarray  # sum of v over all successors of s
    start_offsets: np.ndarray
    origin: float
    mass: np.ndarray  # measure of each Markov interval
    head: np.ndarray  # factor depending on the first symbol of a cylinder

    @classmethod
    def of(cls, params: ParameterChoice, measure: str = "conformal") -> "_Coding":
        if measure not in MEASURES:
            raise ValueError(f"measure must be one of {MEASURES}")
        if not params.is_extremal:
            raise ValueError("psi is built from the Markov coding of an extremal map")
        poly = params.polygon
        g = poly.genus
        m = n_symbols(g)
        v, p = closed_form_eigenvectors(g)
        gen_idx = [params.acting_generator(s) for s in range(1, m + 1)]
        gens = np.stack([poly.gen(k).matrix for k in gen_idx])
        gens_inv = np.stack([poly.gen_inv(k).matrix for k in gen_idx])
        width = 16 * g - 15
        succ = -np.ones((m, width), dtype=np.int64)
        n_succ = np.zeros(m, dtype=np.int64)
        before = np.full((m, m), np.nan)
        total = np.zeros(m)
        for s in range(1, m + 1):
            js = successors(g, s, params.mask[(s + 1) // 2 - 1])
            succ[s - 1, : len(js)] = js
            n_succ[s - 1] = len(js)
            acc = 0.0
            for j in js:
                before[s - 1, j - 1] = acc
                acc += v[j - 1]
            total[s - 1] = acc
        starts, _ = partition_endpoints(poly)
        offsets = ccw_distance(starts[0], starts)
        offsets[0] = 0.0
        if measure == "conformal":
            mass, head = v, np.ones(m)
        else:
            mass, head = p, p / v
        return cls(params, closed_form_lambda(g), v, p, gens, gens_inv, succ, n_succ, before, total,
                   offsets, float(starts[0]), mass, head)

    def cylinder_measure(self, first, last, depth):
        """Measure of the cylinder with given first/last symbols (0-based) and depth."""
        return self.head[first] * self.v[last] / self.lam ** depth

    def locate(self, x) -> np.ndarray:
        """0-based symbol of the Markov interval containing each point."""
        d = ccw_distance(self.origin, np.asarray(x, dtype=float))
        return np.searchsorted(self.start_offsets, d, side="right") - 1


def _act(mats: np.ndarray, x: np.ndarray) -> np.ndarray:
    z = np.exp(1j * x)
    return np.angle((mats[..., 0, 0] * z + mats[..., 0, 1]) / (mats[..., 1, 0] * z + mats[..., 1, 1]))


def measure_cdf(params: ParameterChoice, xs, tol: float = 1e-18, coding: _Coding = None,
              measure: str = "conformal") -> np.ndarray:
    """Measure of the arc from ``P_1`` counter-clockwise to each ``x``.

    At depth ``n`` the orbit point ``f^n(x)`` sits in one successor of the
    previous symbol; the cylinders of the earlier successors lie wholly to
    the left of ``x`` and their measures are added.  If rounding pushes an
    orbit point just outside the image of its parent interval, ``x`` is a
    cylinder endpoint and the sum is closed off exactly.
    """
    c = coding or _Coding.of(params, measure)
    x = np.atleast_1d(np.asarray(xs, dtype=float)).copy()
    s = c.locate(x)
    cum_mass = np.concatenate([[0.0], np.cumsum(c.mass)])
    out = cum_mass[s].copy()
    weight = c.head[s]
    active = np.ones(x.shape, dtype=bool)
    depth = int(math.ceil(-math.log(tol) / math.log(c.lam))) + 1
    for _ in range(depth):
        weight = weight / c.lam
        x = _act(c.gens[s], x)
        s_new = c.locate(x)
        pre = c.before[s, s_new]
        slipped = np.isnan(pre)
        if slipped.any():
            # nearer the start of f(I_s) means x is the left endpoint, nearer the end the right one
            first = c.succ[s, 0] - 1
            last = c.succ[s, c.n_succ[s] - 1] - 1
            dist_first = ccw_distance(x, c.params.polygon.boundary_points()[first])
            dist_last = ccw_distance(c.params.polygon.boundary_points()[(last + 1) % len(c.v)], x)
            at_end = slipped & (dist_last < dist_first)
            out += np.where(active & at_end, weight * c.total[s], 0.0)
            active &= ~slipped
        out += np.where(active, weight * np.nan_to_num(pre), 0.0)
        s = np.where(slipped, s, s_new)
    return out


# ---------------------------------------------------------------------------
# the table


@dataclass(frozen=True)
class PsiTable:
    """Monotone breakpoint table of ``psi``.

    ``x`` and ``y`` are unwrapped: ``x`` runs from ``P_1`` through one turn
    and ``y`` increases by less than ``2 pi``; the final closing point
    ``(x_0 + 2 pi, y_0 + 2 pi)`` is implicit.
    """

    params: ParameterChoice
    epsilon: float
    x: np.ndarray
    y: np.ndarray
    resolution: float
    shift: float
    leaf_words: int
    measure: str
    _coding: _Coding = field(repr=False, compare=False, default=None)

    @property
    def genus(self) -> int:
        return self.params.genus

    @property
    def n_breakpoints(self) -> int:
        return len(self.x)

    def exact(self, xs) -> np.ndarray:
        """``psi`` from the orbit series, unaffected by table resolution."""
        cdf = measure_cdf(self.params, xs, coding=self._coding)
        return normalize(TWO_PI * cdf - self.shift)

    def to_csv(self) -> str:
        xs = normalize(self.x)
        ys = normalize(self.y)
        order = np.argsort(xs, kind="stable")
        rows = ["x,psi"] + [f"{xs[i]:.17g},{ys[i]:.17g}" for i in order]
        return "\n".join(rows) + "\n"

    # closed knot arrays including the wrap-around point
    def _knots(self):
        x0 = self.x[0]
        xo = np.append(self.x - x0, TWO_PI)
        yo = np.append(self.y, self.y[0] + TWO_PI)
        return x0, xo, yo


def build_psi(params: ParameterChoice, epsilon: float, max_nodes: int = 20_000_000,
              measure: str = "conformal") -> PsiTable:
    """Subdivide the circle into cylinders of measure below ``epsilon``.

    Cylinders are refined level by level; a cylinder is split into its
    successors while its measure is at least ``epsilon``, so the final leaf
    set does not depend on the order of refinement.  Cumulative measures
    are summed exactly by counting leaves per measure class (parities of the
    first and last symbol and the depth).
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    c = _Coding.of(params, measure)
    m = len(c.v)

    first = np.arange(m)
    last = np.arange(m)
    depth = np.zeros(m, dtype=np.int64)
    F = np.broadcast_to(np.eye(2, dtype=complex), (m, 2, 2)).copy()
    while True:
        meas = c.cylinder_measure(first, last, depth)
        split = meas >= epsilon
        if not split.any():
            break
        counts = np.where(split, c.n_succ[last], 1)
        total = int(counts.sum())
        if total > max_nodes:
            raise ResolutionError(f"epsilon={epsilon:g} needs more than {max_nodes} cylinders")
        parent = np.repeat(np.arange(len(first)), counts)
        rank = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
        was_split = split[parent]
        child = np.where(was_split, c.succ[last[parent], rank] - 1, last[parent])
        F_new = F[parent]
        F_new[was_split] = F_new[was_split] @ c.gens_inv[last[parent][was_split]]
        first, last, F = first[parent], child, F_new
        depth = depth[parent] + was_split

    starts, _ = partition_endpoints(params.polygon)
    left = _act(F, starts[last])
    offsets = ccw_distance(c.origin, left)
    offsets[0] = 0.0
    if np.any(np.diff(offsets) <= 0):
        raise ArithmeticError("cylinder endpoints are not increasing")

    # exact cumulative measure before each leaf, class by class
    cls = (first % 2) * 2 + (last % 2) + 4 * depth
    cum = np.zeros(len(first))
    measures = c.cylinder_measure(first, last, depth)
    for k in np.unique(cls):
        sel = cls == k
        mk = measures[sel][0]
        cum += mk * (np.cumsum(sel) - sel)
    shift = TWO_PI * float(measure_cdf(params, 0.0, coding=c)[0])
    y = TWO_PI * cum - shift
    return PsiTable(params, epsilon, c.origin + offsets, y, float(measures.max()), shift, len(first), measure, c)


def psi_eval(table: PsiTable, x, exact: bool = False):
    """``psi(x)``: linear interpolation between breakpoints, or the orbit series if ``exact``."""
    scalar = np.ndim(x) == 0
    if exact:
        out = table.exact(x)
    else:
        x0, xo, yo = table._knots()
        out = normalize(np.interp(ccw_distance(x0, np.asarray(x, dtype=float)), xo, yo))
    return float(np.asarray(out).reshape(-1)[0]) if scalar else np.asarray(out)


def psi_inverse(table: PsiTable, y, exact: bool = False, iters: int = 60):
    """``psi^{-1}(y)``; with ``exact`` the table cell is bisected against the orbit series."""
    scalar = np.ndim(y) == 0
    x0, xo, yo = table._knots()
    y0 = yo[0]
    t = ccw_distance(normalize(y0), np.atleast_1d(np.asarray(y, dtype=float))) + y0
    out = np.interp(t, yo, xo)
    if exact:
        i = np.clip(np.searchsorted(yo, t, side="right") - 1, 0, len(xo) - 2)
        lo, hi = xo[i].copy(), xo[i + 1].copy()
        target = (t - y0) / TWO_PI
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            val = measure_cdf(table.params, x0 + mid, coding=table._coding)
            # the series measures from P_1, so values past the seam read near zero
            val = np.where(mid >= TWO_PI - 1e-15, 1.0, val)
            below = val < target
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        out = 0.5 * (lo + hi)
    res = normalize(x0 + out)
    return float(res[0]) if scalar else res


# ---------------------------------------------------------------------------
# structure checks


def _arc_points(table: PsiTable, start: float, end: float, limit: int, rng) -> np.ndarray:
    """Up to ``limit`` table breakpoints strictly inside the arc ``[start, end]``."""
    width = ccw_distance(start, end)
    d = ccw_distance(start, table.x)
    idx = np.flatnonzero((d > 1e-12) & (d < width - 1e-12))
    if len(idx) > limit:
        idx = rng.choice(idx, limit, replace=False)
    # order along the arc, which may cross the seam of the table
    idx = idx[np.argsort(d[idx], kind="stable")]
    return table.x[idx]


def _chord_slopes(y1, y2, z1, z2):
    dy = ccw_distance(y1, y2)
    dz = ccw_distance(z1, z2)
    return dz / dy


def two_slope_report(table: PsiTable, k: int, samples: int = 200, seed: int = 0) -> dict:
    """Chord slopes of ``S_k = psi T_k psi^{-1}`` on both of its linearity arcs."""
    rng = np.random.default_rng(seed)
    poly = table.params.polygon
    T = poly.gen(k)
    lam = closed_form_lambda(poly.genus)
    out = {}
    for name, a, b, expected in (("expanding", poly.p(k), poly.q(k + 1), lam),
                                 ("contracting", poly.q(k + 1), poly.p(k), 1.0 / lam)):
        xs = _arc_points(table, a, b, samples, rng)
        y = table.exact(xs)
        z = table.exact(T.apply_angle(xs))
        i, j = rng.integers(0, len(xs), (2, samples))
        keep = i < j
        slopes = _chord_slopes(y[i[keep]], y[j[keep]], z[i[keep]], z[j[keep]])
        out[name] = {
            "expected": expected,
            "median": float(np.median(slopes)),
            "max_rel_dev": float(np.max(np.abs(slopes / expected - 1.0))),
            "pairs": int(keep.sum()),
        }
    return out


def inverse_branch_defect(table: PsiTable, k: int, samples: int = 100, seed: int = 0) -> float:
    """``S_k`` undoes ``S_sigma(k)`` on ``[P'_s, Q'_{s+1}]``, through the exact inverse of ``psi``."""
    rng = np.random.default_rng(seed)
    poly = table.params.polygon
    s = sigma(k, poly.genus)
    xs = _arc_points(table, poly.p(s), poly.q(s + 1), samples, rng)
    y = table.exact(xs)

    def S(j, ys):
        return table.exact(poly.gen(j).apply_angle(psi_inverse(table, ys, exact=True)))

    return float(np.max(circle_distance(S(k, S(s, y)), y)))


@dataclass
class PsiReport:
    genus: int
    epsilon: float
    sup_table: float
    sup_exact: float
    translation: float
    central_symmetry: float
    fixed_C: float
    two_slope: float
    inverse_branch: float
    breakpoints: int

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def verify_psi_theorems(g: int, epsilon: float, samples: int = 200, seed: int = 0,
                        measure: str = "conformal") -> PsiReport:
    """Compare independently built ``psi_P`` and ``psi_Q`` and test the symmetries of ``psi``."""
    from .geometry import make_polygon

    poly = make_polygon(g)
    tP = build_psi(make_parameters(poly, "all-P"), epsilon, measure=measure)
    tQ = build_psi(make_parameters(poly, "all-Q"), epsilon, measure=measure)
    rng = np.random.default_rng(seed)

    # table against table at the union of breakpoints
    pts = np.concatenate([tP.x, tQ.x])
    sup_table = float(np.max(circle_distance(psi_eval(tP, pts), psi_eval(tQ, pts))))
    xs = rng.uniform(-math.pi, math.pi, 4 * samples)
    sup_exact = float(np.max(circle_distance(tP.exact(xs), tQ.exact(xs))))

    sample = np.sort(rng.choice(tP.x, min(len(tP.x), 4 * samples), replace=False))
    yP = normalize(tP.y[np.searchsorted(tP.x, sample)])
    translation = float(np.max(circle_distance(psi_eval(tP, sample + poly.alpha), yP + poly.alpha)))
    central = 0.0
    for k in range(1, poly.n + 1):
        ck = poly.c(k)
        refl = tP.exact(2 * ck - sample)
        central = max(central, float(np.max(circle_distance(refl + yP, 2 * ck))))
    fixed = float(np.max(circle_distance(tP.exact(poly.C), poly.C)))

    two_slope = 0.0
    inv = 0.0
    for k in range(1, poly.n + 1):
        rep = two_slope_report(tP, k, samples, seed + k)
        two_slope = max(two_slope, rep["expanding"]["max_rel_dev"], rep["contracting"]["max_rel_dev"])
        inv = max(inv, inverse_branch_defect(tP, k, samples // 4, seed + k))
    return PsiReport(g, epsilon, sup_table, sup_exact, translation, central, fixed, two_slope, inv, tP.n_breakpoints)


# ---------------------------------------------------------------------------
# slope of the conjugated map


@dataclass
class SlopeStats:
    median: float
    max_rel_dev: float
    pairs: int
    skipped: int
    slopes: np.ndarray = field(repr=False)


def conjugated_slope(table: PsiTable, params: ParameterChoice, pairs_per_branch: int = 50, seed: int = 0) -> SlopeStats:
    """Chord slopes of ``psi f_A psi^{-1}`` for any parameter choice ``A``.

    Sample points are table breakpoints (where ``psi`` is exact) taken in
    pairs from a single branch arc ``[A_k, A_{k+1})``; images are evaluated
    with the orbit series.  Pairs closer than the table resolution in
    ``psi`` are skipped and counted.
    """
    rng = np.random.default_rng(seed)
    lam = closed_form_lambda(params.genus)
    poly = params.polygon
    slopes, skipped = [], 0
    for k in range(1, poly.n + 1):
        arc = params.branch_arc(k)
        xs = _arc_points(table, arc.start, arc.end, 4 * pairs_per_branch, rng)
        if len(xs) < 2:
            skipped += pairs_per_branch
            continue
        idx = np.searchsorted(table.x, xs)
        y = normalize(table.y[idx])
        z = table.exact(poly.gen(k).apply_angle(xs))
        i, j = np.sort(rng.integers(0, len(xs), (2, pairs_per_branch)), axis=0)
        dy = ccw_distance(y[i], y[j])
        ok = (i != j) & (dy > TWO_PI * table.resolution)
        skipped += int((~ok).sum())
        slopes.append(_chord_slopes(y[i[ok]], y[j[ok]], z[i[ok]], z[j[ok]]))
    s = np.concatenate(slopes) if slopes else np.array([])
    if len(s) == 0:
        return SlopeStats(float("nan"), float("inf"), 0, skipped, s)
    return SlopeStats(float(np.median(s)), float(np.max(np.abs(s / lam - 1.0))), len(s), skipped, s)
