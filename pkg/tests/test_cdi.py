"""Confidence index and AUC tests.

Oracles here are deliberately naive: plain Python loops over the defining
formulas and O(n^2) pair counting, written before the vectorised module.
"""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from domainsat.cdi import (
    CdiConfig,
    auc,
    cdi_entropy,
    cdi_margin,
    cdi_report,
    delta_auc,
    delta_cdi,
    midranks,
)
from domainsat.core import PredictionSet
from domainsat.errors import EmptyPredictions, MissingLabels, SingleClass


def oracle_margin(ps, boundary=0.5):
    return 2.0 * sum(abs(p - boundary) for p in ps) / len(ps)


def oracle_entropy_index(ps):
    total = 0.0
    for p in ps:
        h = 0.0
        if 0.0 < p < 1.0:
            h = -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)
        total += h
    return 1.0 - total / len(ps)


def oracle_auc(ps, labels):
    pos = [p for p, y in zip(ps, labels) if y == 1]
    neg = [p for p, y in zip(ps, labels) if y == 0]
    wins = 0.0
    for a in pos:
        for b in neg:
            if a > b:
                wins += 1.0
            elif a == b:
                wins += 0.5
    return wins / (len(pos) * len(neg))


def test_margin_worked_example():
    # mean |p - 0.5| of [0.9, 0.1, 0.8, 0.2] is 0.35, doubled 0.7
    assert cdi_margin(np.array([0.9, 0.1, 0.8, 0.2])) == pytest.approx(0.7, abs=1e-15)


def test_entropy_index_frozen_value():
    # H(0.25) = 0.25*2 + 0.75*log2(4/3); index = 1 - H
    expected = 1.0 - (0.5 + 0.75 * math.log2(4.0 / 3.0))
    assert cdi_entropy(np.array([0.25, 0.75])) == pytest.approx(expected, abs=1e-15)
    assert expected == pytest.approx(0.1887218755408672, abs=1e-15)


def test_boundary_probabilities_are_exact():
    assert cdi_margin(np.array([0.0, 1.0])) == 1.0
    assert cdi_margin(np.array([0.5, 0.5])) == 0.0
    assert cdi_entropy(np.array([0.0, 1.0])) == 1.0
    assert cdi_entropy(np.array([0.5])) == 0.0


def test_indices_match_oracle_to_1e12():
    rng = np.random.default_rng(7)
    for trial in range(200):
        n = int(rng.integers(1, 40))
        ps = rng.uniform(0, 1, size=n)
        assert cdi_margin(ps) == pytest.approx(oracle_margin(list(ps)), abs=1e-12)
        assert cdi_entropy(ps) == pytest.approx(oracle_entropy_index(list(ps)), abs=1e-12)


def test_delta_is_exact_subtraction():
    assert delta_cdi(0.7310585786300049, 0.7310585786300049) == 0.0
    assert delta_cdi(0.2, 0.5) == 0.2 - 0.5


def test_auc_simple_fixture():
    # two clean wins and one loss out of four pairs
    preds = PredictionSet(p_positive=[0.9, 0.8, 0.3, 0.4], labels=[1, 0, 0, 1])
    # pairs (0.9 vs 0.8, 0.9 vs 0.3, 0.4 vs 0.8, 0.4 vs 0.3) -> 3 wins / 4
    assert auc(preds) == 0.75


def test_auc_equals_bruteforce_exactly_with_ties():
    rng = np.random.default_rng(11)
    for trial in range(500):
        n = int(rng.integers(2, 13))
        labels = rng.integers(0, 2, size=n)
        if labels.min() == labels.max():
            labels[0] = 1 - labels[0]
        # values on a coarse grid so ties are frequent
        ps = rng.integers(0, 5, size=n) / 4.0
        got = auc(PredictionSet(p_positive=ps, labels=labels))
        assert got == oracle_auc(list(ps), list(labels))


def test_auc_invariant_under_increasing_transform():
    rng = np.random.default_rng(3)
    ps = rng.uniform(0.01, 0.99, size=60)
    labels = rng.integers(0, 2, size=60)
    labels[0], labels[1] = 0, 1
    base = auc(PredictionSet(p_positive=ps, labels=labels))
    squashed = auc(PredictionSet(p_positive=ps**3, labels=labels))
    assert squashed == base


def test_auc_complement_under_mirrored_scores():
    rng = np.random.default_rng(5)
    ps = rng.integers(0, 9, size=50) / 8.0
    labels = rng.integers(0, 2, size=50)
    labels[0], labels[1] = 0, 1
    a = auc(PredictionSet(p_positive=ps, labels=labels))
    b = auc(PredictionSet(p_positive=1.0 - ps, labels=labels))
    assert a + b == pytest.approx(1.0, abs=1e-12)


def test_midranks_are_half_integers():
    r = midranks(np.array([3.0, 1.0, 3.0, 2.0]))
    assert list(r) == [3.5, 1.0, 3.5, 2.0]


def test_delta_auc_and_report():
    ref = PredictionSet(p_positive=[0.9, 0.1, 0.8, 0.2], labels=[1, 0, 1, 0])
    tgt = PredictionSet(p_positive=[0.6, 0.4, 0.55, 0.45], labels=[1, 0, 1, 0])
    rep = cdi_report(ref, tgt)
    assert rep.delta_auc == delta_auc(tgt, ref)
    assert rep.delta_cdi_m == rep.cdi_m_target - rep.cdi_m_ref
    assert rep.delta_cdi_m < 0
    assert rep.alarm  # collapse toward the boundary beyond the default -0.02
    assert rep.boundary == 0.5


def test_report_without_labels_has_no_auc():
    ref = PredictionSet(p_positive=[0.9, 0.1])
    tgt = PredictionSet(p_positive=[0.6, 0.4])
    rep = cdi_report(ref, tgt)
    assert rep.auc_ref is None and rep.auc_target is None and rep.delta_auc is None


def test_errors():
    with pytest.raises(EmptyPredictions):
        cdi_margin(np.array([]))
    with pytest.raises(MissingLabels):
        auc(PredictionSet(p_positive=[0.5, 0.5]))
    with pytest.raises(SingleClass):
        auc(PredictionSet(p_positive=[0.5, 0.6], labels=[1, 1]))
    with pytest.raises(Exception):
        CdiConfig(boundary=1.5)


@given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=50))
def test_margin_index_bounded(ps):
    v = cdi_margin(np.array(ps))
    assert -1e-12 <= v <= 1.0 + 1e-12


@given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=50))
def test_entropy_index_bounded(ps):
    v = cdi_entropy(np.array(ps))
    assert -1e-12 <= v <= 1.0 + 1e-12


@given(
    st.lists(st.floats(min_value=0.05, max_value=0.45), min_size=2, max_size=30),
    st.floats(min_value=0.01, max_value=0.04),
)
def test_margin_index_moves_with_confidence(ps, bump):
    # pushing every prediction farther from the boundary raises the index
    base = np.array(ps)
    farther = np.where(base < 0.5, base - bump, base + bump)
    assert cdi_margin(farther) > cdi_margin(base)
