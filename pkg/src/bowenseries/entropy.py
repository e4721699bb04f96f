"""Estimators of the topological entropy of ``f_A`` and the rigidity sweep.

Three estimators with independent failure modes:

* ``markov-eigen``: log of the Perron value of the transition matrix
  (extremal choices only).
* ``lap-growth``: least-squares growth rate of the lap number of ``f^n``.
* ``conjugate-slope``: log of the slope of ``psi_P f_A psi_P^-1``.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .boundary import ParameterChoice, make_parameters
from .conjugacy import PsiTable, build_psi, conjugated_slope
from .geometry import TWO_PI, ccw_distance, make_polygon
from .markov import NotExtremalError, build_transition_matrix, closed_form_lambda, power_iteration

MARKOV = "markov-eigen"
LAPS = "lap-growth"
SLOPE = "conjugate-slope"

TOLERANCES = {MARKOV: 1e-9, LAPS: 5e-2, SLOPE: 1e-3}
SWEEP_HEADER = ["genus", "spec", "method", "estimate", "reference", "deviation", "pass"]


class BudgetError(MemoryError):
    pass


def reference_entropy(g: int) -> float:
    return math.log(closed_form_lambda(g))


@dataclass
class EntropyReport:
    method: str
    estimate: float
    reference: float
    metadata: dict = field(default_factory=dict)

    @property
    def deviation(self) -> float:
        return abs(self.estimate - self.reference)

    @property
    def relative_deviation(self) -> float:
        return self.deviation / self.reference

    def passed(self, tol: float = None) -> bool:
        """Markov estimates are held to an absolute bound, the others to a relative one."""
        tol = TOLERANCES[self.method] if tol is None else tol
        dev = self.deviation if self.method == MARKOV else self.relative_deviation
        return bool(dev <= tol)


# ---------------------------------------------------------------------------
# markov-eigen


def entropy_markov(source) -> EntropyReport:
    """``log lambda`` from power iteration on a transition matrix or an extremal parameter choice."""
    if isinstance(source, ParameterChoice):
        if not source.is_extremal:
            raise NotExtremalError("the Markov estimator needs extremal parameters")
        M = build_transition_matrix(source)
    else:
        M = np.asarray(source)
    g = (M.shape[0] + 8) // 16
    lam, _ = power_iteration(M)
    return EntropyReport(MARKOV, math.log(lam), reference_entropy(g), {"lambda": lam})


# ---------------------------------------------------------------------------
# lap-growth


def _image(mats: np.ndarray, x: np.ndarray) -> np.ndarray:
    z = np.exp(1j * x)
    return np.angle((mats[..., 0, 0] * z + mats[..., 0, 1]) / (mats[..., 1, 0] * z + mats[..., 1, 1]))


def _cut(starts, lengths, b_start, b_len, tol):
    """Components of ``arc_i ∩ branch_k`` for every pair: (arc index, branch index, start, length).

    Two arcs on the circle meet in at most two components: one starting at
    the branch start and one starting at the arc start.
    """
    d = ccw_distance(starts[:, None], b_start[None, :])  # branch start seen from arc start
    e = ccw_distance(b_start[None, :], starts[:, None])  # arc start seen from branch start
    L = lengths[:, None]
    B = b_len[None, :]
    len_a = np.where(d < L, np.minimum(B, L - d), 0.0)
    len_b = np.where((e > 0) & (e < B), np.minimum(L, B - e), 0.0)
    ia, ka = np.nonzero(len_a > tol)
    ib, kb = np.nonzero(len_b > tol)
    idx = np.concatenate([ia, ib])
    ks = np.concatenate([ka, kb])
    st = np.concatenate([np.broadcast_to(b_start, d.shape)[ia, ka], starts[ib]])
    ln = np.concatenate([len_a[ia, ka], len_b[ib, kb]])
    return idx, ks, st, ln


def lap_counts(params: ParameterChoice, n_max: int, tol: float = 1e-9, max_nodes: int = 10_000_000) -> list:
    """Lap numbers of ``f^1 .. f^n_max``.

    A lap of ``f^n`` is a nonempty set of points sharing their first ``n``
    branch indices; on it ``f^n`` is continuous and increasing.  The forward
    image of each lap is an arc, and the laps of ``f^{n+1}`` inside it are
    its nonempty intersections with the branch arcs.  Intersections shorter
    than ``tol`` are boundary contacts and are dropped.
    """
    if n_max < 1:
        raise ValueError("n must be at least 1")
    poly = params.polygon
    K = poly.n
    gens = np.stack([poly.gen(k).matrix for k in range(1, K + 1)])
    b_start = np.asarray(params.A, dtype=float)
    b_len = np.array([params.branch_arc(k).length for k in range(1, K + 1)])

    def push(ks, st, ln):
        a = _image(gens[ks], st)
        b = _image(gens[ks], st + ln)
        return a, ccw_distance(a, b)

    starts, lengths = push(np.arange(K), b_start, b_len)
    counts = [K]
    for _ in range(1, n_max):
        idx, ks, st, ln = _cut(starts, lengths, b_start, b_len, tol)
        counts.append(len(idx))
        if len(counts) == n_max:
            break
        if len(idx) > max_nodes:
            raise BudgetError(f"{len(idx)} laps exceed the budget of {max_nodes}")
        starts, lengths = push(ks, st, ln)
    return counts


def lap_count(params: ParameterChoice, n: int, **kw) -> int:
    return lap_counts(params, n, **kw)[-1]


def extremal_lap_counts(params: ParameterChoice, n_max: int) -> list:
    """Lap numbers of an extremal map counted symbolically.

    A branch word is realised iff some admissible Markov word projects onto
    it (symbols ``2k-1`` and ``2k`` lie in the branch ``[A_k, A_{k+1})`` when
    ``A_k = P_k``; when ``A_k = Q_k`` the branch is ``I_{2k}`` followed by
    ``I_{2k+1}``).  Counting distinct projections is a subset construction
    over the Markov symbols compatible with the word so far.
    """
    if not params.is_extremal:
        raise NotExtremalError("symbolic lap counts need extremal parameters")
    M = build_transition_matrix(params, validate=False)
    m = M.shape[0]
    branch_of = np.array([params.acting_generator(s) for s in range(1, m + 1)])
    K = params.polygon.n
    states = {}
    for k in range(1, K + 1):
        key = frozenset(int(s) for s in np.flatnonzero(branch_of == k))
        states[key] = states.get(key, 0) + 1
    counts = [sum(states.values())]
    for _ in range(1, n_max):
        nxt = {}
        for cur, mult in states.items():
            reach = set()
            for s in cur:
                reach.update(int(j) for j in np.flatnonzero(M[s]))
            for k in range(1, K + 1):
                key = frozenset(j for j in reach if branch_of[j] == k)
                if key:
                    nxt[key] = nxt.get(key, 0) + mult
        states = nxt
        counts.append(sum(states.values()))
    return counts


def entropy_lap_growth(params: ParameterChoice, n_max: int, n_min: int = 2, **kw) -> EntropyReport:
    """Least-squares slope of ``log lap(n)`` against ``n`` for ``n_min <= n <= n_max``."""
    if n_max < 4:
        raise ValueError("n_max must be at least 4")
    counts = lap_counts(params, n_max, **kw)
    ns = np.arange(n_min, n_max + 1)
    logs = np.log(np.asarray(counts[n_min - 1:], dtype=float))
    slope, icpt = np.polyfit(ns, logs, 1)
    if slope <= 0:
        raise ValueError("lap numbers do not grow; entropy estimate is meaningless")
    resid = logs - (slope * ns + icpt)
    meta = {"n_min": n_min, "n_max": n_max, "counts": counts, "residual_max": float(np.max(np.abs(resid)))}
    return EntropyReport(LAPS, float(slope), reference_entropy(params.genus), meta)


# ---------------------------------------------------------------------------
# conjugate-slope


def entropy_conjugate_slope(params: ParameterChoice, table: PsiTable, pairs_per_branch: int = 50,
                            seed: int = 0) -> EntropyReport:
    stats = conjugated_slope(table, params, pairs_per_branch, seed)
    meta = {"pairs": stats.pairs, "skipped": stats.skipped, "max_rel_dev": stats.max_rel_dev,
            "epsilon": table.epsilon, "seed": seed}
    return EntropyReport(SLOPE, math.log(stats.median), reference_entropy(params.genus), meta)


# ---------------------------------------------------------------------------
# sweep


def thread_count() -> int:
    """Worker threads, capped by ``BSL_THREADS``."""
    env = os.environ.get("BSL_THREADS")
    if env:
        n = int(env)
        if n < 1:
            raise ValueError("BSL_THREADS must be a positive integer")
        return n
    return min(8, os.cpu_count() or 1)


@dataclass
class SweepRow:
    genus: int
    spec: str
    report: EntropyReport

    def as_list(self) -> list:
        r = self.report
        return [self.genus, self.spec, r.method, f"{r.estimate:.12g}", f"{r.reference:.12g}",
                f"{r.deviation:.6e}", "PASS" if r.passed() else "FAIL"]


@dataclass
class SweepResult:
    genus: int
    rows: list

    @property
    def passed(self) -> bool:
        """The certificate: every conjugate-slope estimate is within tolerance."""
        slope = [r for r in self.rows if r.report.method == SLOPE]
        return bool(slope) and all(r.report.passed() for r in slope)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        for row in self.rows:
            w.writerow(row.as_list())
        return buf.getvalue()


def rigidity_sweep(g: int, specs, epsilon: float = 1e-5, n_max: int = None, methods=(SLOPE, LAPS, MARKOV),
                   seed: int = 0, threads: int = None, table: PsiTable = None) -> SweepResult:
    """Run the estimators over parameter choices and tabulate them against ``log lambda``.

    ``specs`` is a list of :class:`ParameterChoice` or spec strings.  The
    ``psi_P`` table is built once and shared.  Specs are processed in
    parallel; rows come back in input order.
    """
    poly = make_polygon(g)
    choices = [s if isinstance(s, ParameterChoice) else make_parameters(poly, s, seed) for s in specs]
    if n_max is None:
        n_max = 6 if g == 2 else 5 if g == 3 else 4
    if SLOPE in methods and table is None:
        table = build_psi(make_parameters(poly, "all-P"), epsilon)

    def run(pc: ParameterChoice) -> list:
        out = []
        if SLOPE in methods:
            out.append(entropy_conjugate_slope(pc, table, seed=seed))
        if LAPS in methods:
            out.append(entropy_lap_growth(pc, n_max))
        if MARKOV in methods and pc.is_extremal:
            out.append(entropy_markov(pc))
        return out

    workers = threads or thread_count()
    with ThreadPoolExecutor(max_workers=workers) as ex:
        results = list(ex.map(run, choices))
    rows = [SweepRow(g, pc.label, rep) for pc, reps in zip(choices, results) for rep in reps]
    return SweepResult(g, rows)
