import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bowenseries.boundary import make_parameters
from bowenseries.geometry import circle_distance
from bowenseries.symbolic import (
    BoundaryAmbiguityError,
    CylinderWord,
    InadmissibleWordError,
    admissible_words,
    check_admissibility_lemma,
    check_generator_relation,
    check_inductive_relation,
    code_point,
    cylinder_by_preimage,
    cylinder_interval,
    flavor_matrix,
    generator_for_symbol,
    max_cylinder_length,
    q_cylinder_measure,
    q_words_meeting,
    recode_P_to_Q,
    verify_recoding,
)


def test_generator_for_symbol():
    assert [generator_for_symbol(2, s, "P") for s in (1, 2, 3, 24)] == [1, 1, 2, 12]
    assert [generator_for_symbol(2, s, "Q") for s in (1, 2, 3, 24)] == [12, 1, 1, 12]


def test_cylinder_rejects_inadmissible(poly2):
    with pytest.raises(InadmissibleWordError):
        cylinder_interval(poly2, (1, 1), "P")
    with pytest.raises(InadmissibleWordError):
        cylinder_interval(poly2, (), "P")
    with pytest.raises(ValueError):
        CylinderWord((1,), "R")


def test_rank_one_cylinders_are_partition(poly2):
    for s in range(1, 25):
        a = cylinder_interval(poly2, (s,), "P")
        b = cylinder_interval(poly2, (s,), "Q")
        assert circle_distance(a.start, b.start) < 1e-15 and abs(a.length - b.length) < 1e-15


@pytest.mark.parametrize("word", [(1, 16), (2, 18, 5), (6, 18, 12), (16, 24, 21, 20)])
def test_cylinder_matches_preimage(poly2, allP2, word):
    a = cylinder_interval(poly2, word, "P")
    b = cylinder_by_preimage(allP2, word)
    assert circle_distance(a.start, b.start) < 1e-10 and abs(a.length - b.length) < 1e-10


def test_cylinder_lengths_shrink(poly2):
    d = [max_cylinder_length(poly2, r) for r in (1, 2, 3)]
    assert d[0] > d[1] > d[2]


@given(st.floats(-math.pi, math.pi))
def test_code_point_lands_in_its_cylinder(x):
    from bowenseries.geometry import make_polygon

    poly = make_polygon(2)
    pc = make_parameters(poly, "all-P")
    try:
        w = code_point(pc, x, 4)
    except BoundaryAmbiguityError:
        return
    assert cylinder_interval(poly, w).contains(x, 1e-12)


def test_code_point_requires_extremal(poly2):
    with pytest.raises(ValueError):
        code_point(make_parameters(poly2, "random", seed=0), 0.1, 3)


def test_recoding_examples():
    words = recode_P_to_Q(2, (1, 16))
    assert len(words) == 17
    assert recode_P_to_Q(2, (1, 17)) == [(1, 2, 9), (1, 2, 10)]
    assert len(recode_P_to_Q(2, (2,))) == 17


@pytest.mark.parametrize("omega", [(1,), (2,), (1, 16), (1, 17), (2, 18), (1, 16, 16), (1, 17, 24), (16, 24, 21)])
def test_recoding_reports(poly2, omega):
    r = verify_recoding(poly2, omega)
    assert r.ok, r.as_dict()


def test_recoding_matches_oracle_g3(poly3):
    rng = np.random.default_rng(3)
    words = list(admissible_words(3, 2))
    for i in rng.choice(len(words), 40, replace=False):
        assert verify_recoding(poly3, words[i]).ok


def test_recoding_measures_sum(poly2):
    total = math.fsum(q_cylinder_measure(2, w) for w in admissible_words(2, 2, "Q"))
    assert abs(total - 1) < 1e-12


def test_oracle_on_partition_arc(poly2):
    target = cylinder_interval(poly2, (1,), "P")
    assert q_words_meeting(poly2, target, 2) == [(1, 1), (1, 2)]


def test_admissibility_lemma():
    for g in (2, 3, 4):
        r = check_admissibility_lemma(g)
        assert r["ok"], r
        assert r["checked"] > 0


def test_generator_relations(poly2, poly3):
    for poly in (poly2, poly3):
        for k in range(1, poly.n + 1):
            assert check_generator_relation(poly, k) < 1e-12
            for m in range(0, 6):
                assert check_inductive_relation(poly, k, m) < 1e-9


def test_inductive_relation_rejects_negative(poly2):
    with pytest.raises(ValueError):
        check_inductive_relation(poly2, 1, -1)


def test_admissible_word_counts():
    assert [sum(1 for _ in admissible_words(2, n)) for n in (1, 2, 3)] == [24, 228, 2256]
    M = flavor_matrix(2, "Q")
    assert not M.flags.writeable
