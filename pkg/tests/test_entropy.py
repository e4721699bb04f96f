import math

import numpy as np
import pytest

from bowenseries.boundary import make_parameters, mask_from_int
from bowenseries.entropy import (
    LAPS,
    MARKOV,
    SLOPE,
    SWEEP_HEADER,
    EntropyReport,
    entropy_lap_growth,
    entropy_markov,
    extremal_lap_counts,
    lap_counts,
    reference_entropy,
    rigidity_sweep,
    thread_count,
)
from bowenseries.markov import NotExtremalError, build_transition_matrix

H2 = math.log(5 + 2 * math.sqrt(6))


def test_reference_value():
    assert reference_entropy(2) == pytest.approx(2.2924316696, abs=1e-10)


def test_first_lap_count_is_number_of_branches(poly2, poly3):
    assert lap_counts(make_parameters(poly2, "random", seed=1), 1) == [12]
    assert lap_counts(make_parameters(poly3, "all-Q"), 1) == [20]


@pytest.mark.parametrize("spec", ["all-P", "all-Q", "bitmask:PQQPPQPQQPQP"])
def test_lap_counts_match_symbolic_oracle(poly2, spec):
    pc = make_parameters(poly2, spec)
    assert lap_counts(pc, 5) == extremal_lap_counts(pc, 5)


def test_lap_counts_grow_at_most_by_branch_count(poly2):
    c = lap_counts(make_parameters(poly2, "random", seed=3), 5)
    assert all(b <= 12 * a for a, b in zip(c, c[1:]))
    assert all(b > a for a, b in zip(c, c[1:]))


def test_markov_estimator(poly2, allP2):
    r = entropy_markov(allP2)
    assert r.method == MARKOV and r.deviation < 1e-9 and r.passed()
    r2 = entropy_markov(build_transition_matrix(allP2))
    assert r2.estimate == pytest.approx(r.estimate)
    with pytest.raises(NotExtremalError):
        entropy_markov(make_parameters(poly2, "random", seed=0))


def test_lap_growth_estimator(poly2):
    r = entropy_lap_growth(make_parameters(poly2, "random", seed=11), 6)
    assert r.method == LAPS and r.relative_deviation < 5e-2
    with pytest.raises(ValueError):
        entropy_lap_growth(make_parameters(poly2, "all-P"), 3)


def test_report_tolerances():
    assert EntropyReport(SLOPE, H2 * (1 + 5e-4), H2).passed()
    assert not EntropyReport(SLOPE, H2 * (1 + 5e-3), H2).passed()
    assert not EntropyReport(MARKOV, H2 + 1e-8, H2).passed()


def test_sweep_csv(poly2):
    res = rigidity_sweep(2, ["all-P", mask_from_int(12, 5), "random"], epsilon=1e-4, n_max=4, seed=2, threads=2)
    lines = res.to_csv().splitlines()
    assert lines[0] == ",".join(SWEEP_HEADER)
    assert len(res.rows) == 3 + 3 + 2
    assert res.passed
    assert all(line.endswith("PASS") for line in lines[1:])


def test_sweep_is_reproducible():
    a = rigidity_sweep(2, ["random", "random"], epsilon=1e-4, n_max=4, seed=4, threads=1)
    b = rigidity_sweep(2, ["random", "random"], epsilon=1e-4, n_max=4, seed=4, threads=3)
    assert a.to_csv() == b.to_csv()


def test_thread_env(monkeypatch):
    monkeypatch.setenv("BSL_THREADS", "3")
    assert thread_count() == 3
    monkeypatch.setenv("BSL_THREADS", "0")
    with pytest.raises(ValueError):
        thread_count()
    monkeypatch.delenv("BSL_THREADS")
    assert thread_count() >= 1
