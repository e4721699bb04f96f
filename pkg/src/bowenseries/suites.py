"""Named verification suites driven by ``bsl verify``.

Each suite returns a list of :class:`Check` records.  Suites that take a
polygon use it for every geometric computation, so a corrupted generator
(see :func:`corrupt_generator`) shows up as failing checks.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from . import conjugacy, markov, symbolic
from .boundary import eval_many, make_parameters, mask_from_int, total_branch_length
from .geometry import (
    TWO_PI,
    MobiusTransform,
    PolygonData,
    ccw_distance,
    central_symmetry_defect,
    circle_distance,
    inverse_pair_defect,
    oddness_defect,
    quaternary_defect,
    shift_identity_defect,
    sigma,
    vertex_cycle_defect,
)

SUITES = ("geometry", "markov", "symbolic", "appendix", "conjugacy")


@dataclass
class Check:
    suite: str
    name: str
    value: float
    threshold: float
    ok: bool

    def as_dict(self) -> dict:
        return {"suite": self.suite, "check": self.name, "value": self.value, "threshold": self.threshold, "ok": self.ok}


def _le(suite, name, value, threshold) -> Check:
    value = float(value)
    return Check(suite, name, value, threshold, bool(value <= threshold))


def _flag(suite, name, ok: bool) -> Check:
    return Check(suite, name, 0.0 if ok else 1.0, 0.0, bool(ok))


def corrupt_generator(poly: PolygonData, k: int, delta: float = 1e-6) -> PolygonData:
    """Copy of ``poly`` with ``T_k`` perturbed (``a -> a + delta``); a negative control."""
    gens = list(poly.T)
    T = gens[k - 1]
    gens[k - 1] = MobiusTransform(T.a + delta, T.c)
    return dataclasses.replace(poly, T=tuple(gens))


def geometry_suite(poly: PolygonData, seed: int = 0) -> list:
    s = "geometry"
    rng = np.random.default_rng(seed)
    xs = rng.uniform(-math.pi, math.pi, 1000)
    g = poly.genus
    out = [
        _flag(s, "sigma_involution", all(sigma(sigma(k, g), g) == k for k in range(1, poly.n + 1))),
        _le(s, "inverse_pair", inverse_pair_defect(poly), 1e-10),
        _le(s, "quaternary_relation", quaternary_defect(poly), 1e-10),
        _le(s, "shift_identity", shift_identity_defect(poly, xs), 1e-9),
        _le(s, "central_symmetry", central_symmetry_defect(poly, xs), 1e-9),
        _le(s, "oddness", oddness_defect(poly, xs), 1e-9),
        _le(s, "vertex_cycle", vertex_cycle_defect(poly), 1e-9),
    ]
    mid = max(float(circle_distance(poly.p(k) + 0.5 * ccw_distance(poly.p(k), poly.q(k + 1)), poly.c(k)))
              for k in range(1, poly.n + 1))
    out.append(_le(s, "C_is_midpoint", mid, 1e-10))
    iso = max(abs(poly.gen(k).derivative_modulus(np.exp(1j * poly.p(k))) - 1.0) for k in range(1, poly.n + 1))
    out.append(_le(s, "isometric_circle", iso, 1e-9))
    pP = make_parameters(poly, "all-P")
    pQ = make_parameters(poly, "all-Q")
    out.append(_le(s, "branch_partition", abs(total_branch_length(pP) - TWO_PI), 1e-12))
    fP, _ = eval_many(pP, -xs)
    fQ, _ = eval_many(pQ, xs)
    out.append(_le(s, "fQ_reflects_fP", np.max(circle_distance(fQ, -fP)), 1e-9))
    return out


def markov_suite(poly: PolygonData, seed: int = 0, samples: int = 16) -> list:
    s = "markov"
    g = poly.genus
    rng = np.random.default_rng(seed)
    masks = ["all-P", "all-Q"] + [mask_from_int(poly.n, int(b)) for b in rng.integers(0, 2 ** poly.n, samples)]
    lam = markov.closed_form_lambda(g)
    v, p = markov.closed_form_eigenvectors(g)
    geometric_ok, worst_lam, worst_v, worst_p, worst_sd, rows_ok = True, 0.0, 0.0, 0.0, 0.0, True
    for spec in masks:
        pc = make_parameters(poly, spec)
        try:
            M = markov.build_transition_matrix(pc)
        except AssertionError:
            geometric_ok = False
            M = markov.transition_matrix_from_formulas(pc)
        rs = M.sum(axis=1)
        rows_ok &= bool(np.all(rs[0::2] == 2) and np.all(rs[1::2] == 16 * g - 15))
        lp, _ = markov.power_iteration(M)
        worst_lam = max(worst_lam, abs(lp - lam))
        worst_v = max(worst_v, float(np.max(np.abs(M @ v - lam * v))))
        if spec in ("all-P", "all-Q"):
            worst_p = max(worst_p, markov.left_formula_residual(M))
        sd = markov.spectral_data(M)
        worst_sd = max(worst_sd, float(np.max(np.abs(sd.p @ sd.R - sd.p))))
    out = [
        _flag(s, "matrix_matches_geometry", geometric_ok),
        _flag(s, "row_sums", rows_ok),
        _le(s, "perron_value", worst_lam, 1e-9),
        _le(s, "right_eigenvector", worst_v, 1e-10),
        _le(s, "left_eigenvector_formula_PQ", worst_p, 1e-10),
        _le(s, "stationary_vector", worst_sd, 1e-10),
        _le(s, "lambda_quadratic", abs(lam * (lam - 8 * g + 7) - (lam - 1)), 1e-10),
        _le(s, "lambda_square_identity", abs(lam * (8 * g - 4) - (lam + 1) ** 2), 1e-10),
    ]
    M = markov.transition_matrix(g, "P" * poly.n)
    N = [markov.entrywise_power_sum(M, n) for n in range(11)]
    rec = all(N[n + 1] == (8 * g - 6) * N[n] - N[n - 1] for n in range(1, 10))
    out.append(_flag(s, "counting_recurrence", rec))
    return out


def symbolic_suite(poly: PolygonData, seed: int = 0, samples: int = 200) -> list:
    s = "symbolic"
    g = poly.genus
    rng = np.random.default_rng(seed)
    pc = make_parameters(poly, "all-P")
    M = symbolic.flavor_matrix(g, "P")
    worst, nested = 0.0, True
    for _ in range(samples):
        word = [int(rng.integers(1, M.shape[0] + 1))]
        for _ in range(int(rng.integers(1, 4))):
            word.append(int(rng.choice(np.flatnonzero(M[word[-1] - 1]) + 1)))
        A = symbolic.cylinder_interval(poly, word, "P")
        B = symbolic.cylinder_by_preimage(pc, word)
        if B is None:
            worst = math.inf
            continue
        worst = max(worst, float(circle_distance(A.start, B.start)), abs(A.length - B.length))
        parent = symbolic.cylinder_interval(poly, word[:-1], "P")
        nested &= parent.contains_arc(A, 1e-12)
    coded_ok = True
    for x in rng.uniform(-math.pi, math.pi, samples):
        try:
            w = symbolic.code_point(pc, float(x), 6)
        except symbolic.BoundaryAmbiguityError:
            continue
        coded_ok &= symbolic.cylinder_interval(poly, w.symbols, "P").contains(float(x), 1e-12)
    diam = [symbolic.max_cylinder_length(poly, r) for r in (1, 2, 3)]
    return [
        _le(s, "cylinder_vs_preimage", worst, 1e-10),
        _flag(s, "cylinders_nested", nested),
        _flag(s, "coding_round_trip", coded_ok),
        _flag(s, "diameters_shrink", diam[0] > diam[1] > diam[2]),
    ]


def appendix_suite(poly: PolygonData, max_length: int = None) -> list:
    s = "appendix"
    g = poly.genus
    lemma = symbolic.check_admissibility_lemma(g)
    out = [_flag(s, "admissibility_lemma", lemma["ok"])]
    out.append(_le(s, "generator_relation",
                   max(symbolic.check_generator_relation(poly, k) for k in range(1, poly.n + 1)), 1e-12))
    out.append(_le(s, "inductive_relation",
                   max(symbolic.check_inductive_relation(poly, k, m)
                       for k in range(1, poly.n + 1) for m in range(1, 6)), 1e-9))
    if max_length is None:
        max_length = 3 if g == 2 else 2
    bad, total = 0, 0
    for length in range(1, max_length + 1):
        for w in symbolic.admissible_words(g, length):
            total += 1
            if not symbolic.verify_recoding(poly, w).ok:
                bad += 1
    out.append(Check(s, f"recoding_words_up_to_{max_length}", float(bad), 0.0, bad == 0 and total > 0))
    return out


def conjugacy_suite(poly: PolygonData, epsilon: float = 1e-5) -> list:
    s = "conjugacy"
    r = conjugacy.verify_psi_theorems(poly.genus, epsilon)
    return [
        _le(s, "psi_P_equals_psi_Q_table", r.sup_table, 10 * epsilon),
        _le(s, "psi_P_equals_psi_Q_exact", r.sup_exact, 1e-10),
        _le(s, "translation", r.translation, 2 * epsilon),
        _le(s, "central_symmetry", r.central_symmetry, 2 * epsilon),
        _le(s, "fixes_C", r.fixed_C, 1e-9),
        _le(s, "two_slope", r.two_slope, 1e-3),
        _le(s, "inverse_branch", r.inverse_branch, 1e-6),
    ]


def run_suites(poly: PolygonData, names, epsilon: float = 1e-5, seed: int = 0) -> list:
    """Run the named suites (``"all"`` expands to every suite) in a fixed order."""
    if "all" in names:
        names = SUITES
    unknown = set(names) - set(SUITES)
    if unknown:
        raise ValueError(f"unknown suite(s): {sorted(unknown)}")
    runners = {
        "geometry": lambda: geometry_suite(poly, seed),
        "markov": lambda: markov_suite(poly, seed),
        "symbolic": lambda: symbolic_suite(poly, seed),
        "appendix": lambda: appendix_suite(poly),
        "conjugacy": lambda: conjugacy_suite(poly, epsilon),
    }
    checks = []
    for name in SUITES:
        if name in names:
            checks.extend(runners[name]())
    return checks
