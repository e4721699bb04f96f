"""Acceptance criteria, one test each.

Every test prints a single ``PASS``/``FAIL`` line and records it for the
terminal summary.  Run with ``pytest -s tests/test_acceptance.py`` to see
the lines inline.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest

from bowenseries.boundary import make_parameters, mask_from_int, random_parameters
from bowenseries.conjugacy import verify_psi_theorems
from bowenseries.entropy import LAPS, SLOPE, rigidity_sweep
from bowenseries.geometry import (
    central_symmetry_defect,
    inverse_pair_defect,
    make_polygon,
    oddness_defect,
    quaternary_defect,
    shift_identity_defect,
    vertex_cycle_defect,
)
from bowenseries.markov import (
    build_transition_matrix,
    closed_form_eigenvectors,
    closed_form_lambda,
    entrywise_power_sum,
    left_formula_residual,
    matrix_from_csv,
    power_iteration,
    successors,
    transition_matrix,
)
from bowenseries.symbolic import (
    admissible_words,
    check_generator_relation,
    check_inductive_relation,
    recode_P_to_Q,
    verify_recoding,
)

from .conftest import ACCEPTANCE_LINES

DATA = Path(__file__).parent / "data"


def report(number: int, title: str, ok: bool, detail: str) -> bool:
    line = f"{'PASS' if ok else 'FAIL'} [{number}] {title}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok


def test_1_spectral_rigidity():
    t0 = time.perf_counter()
    worst, count = 0.0, 0
    rng = np.random.default_rng(0)
    for g in (2, 3, 4):
        n = 8 * g - 4
        bits = range(2 ** n) if g == 2 else rng.integers(0, 2 ** n, 512)
        lam = closed_form_lambda(g)
        for b in bits:
            est, _ = power_iteration(transition_matrix(g, mask_from_int(n, int(b))))
            worst = max(worst, abs(est - lam))
            count += 1
    dt = time.perf_counter() - t0
    ok = worst < 1e-9 and dt <= 60
    assert report(1, "spectral rigidity", ok, f"{count} matrices, max |lambda - closed form| = {worst:.2e}, {dt:.1f}s")


def test_2_matrix_ground_truth(poly2):
    MP = build_transition_matrix(make_parameters(poly2, "all-P"))
    MQ = build_transition_matrix(make_parameters(poly2, "all-Q"))
    fP = matrix_from_csv((DATA / "MP_g2.csv").read_text())
    fQ = matrix_from_csv((DATA / "MQ_g2.csv").read_text())
    diff = int(np.sum(MP != fP) + np.sum(MQ != fQ))
    assert report(2, "matrix ground truth", diff == 0, f"{diff} differing entries in M_P, M_Q")


def _right_residual_exhaustive(g: int) -> float:
    """``max |Mv - lambda v|`` over every extremal mask.

    Row ``i`` of ``M`` depends only on the mask letter of its own odd
    symbol, so checking both letters for every row covers all ``2^n`` masks.
    """
    lam = closed_form_lambda(g)
    v, _ = closed_form_eigenvectors(g)
    worst = 0.0
    for i in range(1, 16 * g - 7):
        for letter in "PQ":
            row = math.fsum(v[j - 1] for j in successors(g, i, letter))
            worst = max(worst, abs(row - lam * v[i - 1]))
    return worst


@pytest.mark.xfail(strict=True, reason="closed-form p is stationary only for the all-P and all-Q matrices")
def test_3_eigenvector_formulas():
    right = max(_right_residual_exhaustive(g) for g in (2, 3, 4))
    rng = np.random.default_rng(3)
    left_pq, left_mixed = 0.0, 0.0
    for g in (2, 3, 4):
        n = 8 * g - 4
        left_pq = max(left_pq, left_formula_residual(transition_matrix(g, "P" * n)),
                      left_formula_residual(transition_matrix(g, "Q" * n)))
        for b in rng.integers(1, 2 ** n - 1, 64):
            left_mixed = max(left_mixed, left_formula_residual(transition_matrix(g, mask_from_int(n, int(b)))))
    ok = right < 1e-10 and left_pq < 1e-10 and left_mixed < 1e-10
    report(3, "eigenvector formulas", ok,
           f"Mv=lambda v max {right:.1e} (all masks); pR=p max {left_pq:.1e} on all-P/all-Q, "
           f"{left_mixed:.1e} on mixed masks")
    assert ok


def test_4_counting_recurrence():
    bad = []
    for g in (2, 3):
        n = 8 * g - 4
        for mask in ("P" * n, "Q" * n, mask_from_int(n, 0b1011)):
            M = transition_matrix(g, mask)
            N = [entrywise_power_sum(M, k) for k in range(11)]
            bad += [(g, k) for k in range(1, 10) if N[k + 1] != (8 * g - 6) * N[k] - N[k - 1]]
            if g == 2:
                bad += [(g, "start")] if N[:3] != [24, 228, 2256] else []
    assert report(4, "counting recurrence", not bad, f"exact for n <= 10, g = 2, 3; {len(bad)} mismatches")


def test_5_appendix_recoding(poly2):
    t0 = time.perf_counter()
    total, failed = 0, []
    for length in (1, 2, 3):
        for w in admissible_words(2, length):
            total += 1
            r = verify_recoding(poly2, w, tol=1e-9)
            if not r.ok:
                failed.append(w)
    examples = len(recode_P_to_Q(2, (1, 16))) == 17 and recode_P_to_Q(2, (1, 17)) == [(1, 2, 9), (1, 2, 10)]
    dt = time.perf_counter() - t0
    ok = not failed and total == 24 + 228 + 2256 and examples and dt <= 120
    assert report(5, "appendix recoding", ok,
                  f"{total} words, {len(failed)} failures, worked examples {'ok' if examples else 'wrong'}, {dt:.1f}s")


def test_6_conjugacy_structure():
    r = verify_psi_theorems(2, 1e-5)
    ok = r.sup_table < 1e-4 and r.translation < 2e-5 and r.central_symmetry < 2e-5 and r.two_slope < 1e-3
    assert report(6, "conjugacy structure", ok,
                  f"sup|psiP-psiQ| {r.sup_table:.1e}, translation {r.translation:.1e}, "
                  f"central {r.central_symmetry:.1e}, two-slope {r.two_slope:.1e}")


def test_7_rigidity_sweep():
    t0 = time.perf_counter()
    parts = []
    ok = True
    for g, count in ((2, 20), (3, 5)):
        poly = make_polygon(g)
        specs = [random_parameters(poly, seed) for seed in range(count)]
        res = rigidity_sweep(g, specs, epsilon=1e-5, n_max=6 if g == 2 else 5, methods=(SLOPE, LAPS), seed=0)
        slope = [r.report for r in res.rows if r.report.method == SLOPE]
        laps = [r.report for r in res.rows if r.report.method == LAPS]
        ok &= all(r.relative_deviation < 1e-3 for r in slope) and all(r.relative_deviation < 5e-2 for r in laps)
        ok &= len(slope) == len(laps) == count
        parts.append(f"g={g}: slope {max(r.relative_deviation for r in slope):.1e}, "
                     f"laps {max(r.relative_deviation for r in laps):.1e}")
    dt = time.perf_counter() - t0
    ok &= dt <= 300
    assert report(7, "rigidity sweep", ok, "; ".join(parts) + f" (max relative deviation), {dt:.1f}s")


def test_8_generator_identities():
    t0 = time.perf_counter()
    worst = 0.0
    xs = np.random.default_rng(8).uniform(-math.pi, math.pi, 500)
    for g in (2, 3, 4, 5):
        poly = make_polygon(g)
        for k in range(1, poly.n + 1):
            worst = max(worst, check_generator_relation(poly, k),
                        *(check_inductive_relation(poly, k, m) for m in range(1, 6)))
        worst = max(worst, quaternary_defect(poly), inverse_pair_defect(poly), vertex_cycle_defect(poly),
                    shift_identity_defect(poly, xs), central_symmetry_defect(poly, xs), oddness_defect(poly, xs))
    dt = time.perf_counter() - t0
    ok = worst < 1e-9 and dt <= 10
    assert report(8, "generator identities", ok, f"max defect {worst:.1e} over g = 2..5, {dt:.1f}s")
