import math

import numpy as np
import pytest

from bowenseries.boundary import make_parameters
from bowenseries.conjugacy import (
    build_psi,
    conjugated_slope,
    inverse_branch_defect,
    measure_cdf,
    psi_eval,
    psi_inverse,
    two_slope_report,
    verify_psi_theorems,
)
from bowenseries.geometry import TWO_PI, ccw_distance, circle_distance
from bowenseries.markov import closed_form_lambda


@pytest.fixture(scope="module")
def tableP(allP2):
    return build_psi(allP2, 1e-4)


def test_cdf_is_monotone_and_anchored(allP2, poly2):
    xs = poly2.p(1) + np.linspace(0, TWO_PI, 400, endpoint=False)
    cdf = measure_cdf(allP2, xs)
    assert cdf[0] == pytest.approx(0.0, abs=1e-15)
    assert np.all(np.diff(cdf) >= -1e-15)
    assert cdf[-1] < 1.0


def test_cdf_of_partition_points(allP2, poly2):
    # conformal measure of I_1 is v_1, of I_1 u I_2 is v_1 + v_2
    from bowenseries.markov import closed_form_eigenvectors

    v, _ = closed_form_eigenvectors(2)
    assert measure_cdf(allP2, poly2.q(1)) == pytest.approx(v[0], abs=1e-13)
    assert measure_cdf(allP2, poly2.p(2)) == pytest.approx(v[0] + v[1], abs=1e-13)


def test_table_agrees_with_series(tableP):
    xs = np.random.default_rng(0).uniform(-math.pi, math.pi, 300)
    assert np.max(circle_distance(psi_eval(tableP, xs), tableP.exact(xs))) < 10 * tableP.epsilon


def test_psi_fixes_zero_and_centres(tableP, poly2):
    assert abs(psi_eval(tableP, 0.0, exact=True)) < 1e-12
    assert np.max(circle_distance(tableP.exact(poly2.C), poly2.C)) < 1e-9


def test_psi_is_monotone(tableP):
    assert np.all(np.diff(tableP.x) > 0) and np.all(np.diff(tableP.y) > 0)
    assert tableP.y[-1] - tableP.y[0] < TWO_PI


def test_inverse_round_trip(tableP):
    xs = np.random.default_rng(1).uniform(-math.pi, math.pi, 200)
    assert np.max(circle_distance(psi_inverse(tableP, psi_eval(tableP, xs)), xs)) < 1e-9
    ex = psi_inverse(tableP, tableP.exact(xs[:20]), exact=True)
    assert np.max(circle_distance(ex, xs[:20])) < 1e-10


def test_translation_equivariance(tableP, poly2):
    xs = tableP.x[::50]
    lhs = tableP.exact(xs + poly2.alpha)
    rhs = tableP.exact(xs) + poly2.alpha
    assert np.max(circle_distance(lhs, rhs)) < 1e-10


def test_two_slopes_and_inverse_branch(tableP):
    rep = two_slope_report(tableP, 1)
    lam = closed_form_lambda(2)
    assert rep["expanding"]["max_rel_dev"] < 1e-6
    assert rep["contracting"]["max_rel_dev"] < 1e-6
    assert rep["expanding"]["expected"] == pytest.approx(lam)
    assert inverse_branch_defect(tableP, 1) < 1e-9


def test_P_and_Q_conjugacies_coincide():
    r = verify_psi_theorems(2, 1e-4, samples=50)
    assert r.sup_exact < 1e-10
    assert r.sup_table < 1e-3
    assert r.two_slope < 1e-6


def test_parry_weighting_does_not_linearize(allP2):
    # ordinary Parry weights do not give constant slope
    table = build_psi(allP2, 1e-4, measure="parry")
    rep = two_slope_report(table, 1)
    assert max(rep["expanding"]["max_rel_dev"], rep["contracting"]["max_rel_dev"]) > 1e-2


def test_conjugated_slope_for_general_parameters(tableP, poly2):
    pc = make_parameters(poly2, "random", seed=7)
    stats = conjugated_slope(tableP, pc, pairs_per_branch=20)
    assert stats.median == pytest.approx(closed_form_lambda(2), rel=1e-9)
    assert stats.max_rel_dev < 1e-3


def test_csv_header_and_sorting(tableP):
    lines = tableP.to_csv().splitlines()
    assert lines[0] == "x,psi"
    xs = np.array([float(l.split(",")[0]) for l in lines[1:]])
    assert np.all(np.diff(xs) >= 0) and len(xs) == tableP.n_breakpoints


def test_bad_measure_and_epsilon(allP2):
    with pytest.raises(ValueError):
        build_psi(allP2, 1e-3, measure="lebesgue")
    with pytest.raises(ValueError):
        build_psi(allP2, 0.0)


def test_resolution_budget(allP2):
    with pytest.raises(MemoryError):
        build_psi(allP2, 1e-7, max_nodes=1000)
