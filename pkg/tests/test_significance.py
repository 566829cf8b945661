import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cardiopipe.discretize import discretize
from cardiopipe.errors import DegenerateLabels, EmptyDistribution, NoCoverage
from cardiopipe.preprocess import FeatureSubset
from cardiopipe.significance import (
    ProbabilityTable,
    entropy,
    mutual_information,
    prior_entropy,
    rank_symptoms,
    ranking_from_csv,
    ranking_to_csv,
    significance,
)

from conftest import make_dataset

# Entropy of the Cleveland absence/presence split (164 vs 139 records), by
# direct evaluation of -sum p log2 p; frozen from an independent computation.
H_CLEVELAND_BINARY = 0.995083759492973


def brute_force_mi(counts) -> float:
    counts = [[float(v) for v in row] for row in counts]
    total = sum(map(sum, counts))
    pf = [sum(row) / total for row in counts]
    pc = [sum(row[j] for row in counts) / total for j in range(len(counts[0]))]
    out = 0.0
    for i, row in enumerate(counts):
        for j, n in enumerate(row):
            if n:
                p = n / total
                out += p * math.log2(p / (pf[i] * pc[j]))
    return out


def table_dataset(counts):
    """Dataset realizing a contingency table: rows are ca codes 0..3, columns classes."""
    ca, labels = [], []
    for f, row in enumerate(counts):
        for c, n in enumerate(row):
            ca += [f] * int(n)
            labels += [c] * int(n)
    return make_dataset({44: ca}, labels=labels)


# -- entropy -------------------------------------------------------------------

def test_entropy_examples():
    assert entropy([0.5, 0.5]) == pytest.approx(1.0, abs=1e-15)
    assert entropy([1.0]) == 0.0
    assert entropy([164, 139]) == pytest.approx(H_CLEVELAND_BINARY, abs=1e-12)
    assert entropy([164 / 303, 139 / 303]) == pytest.approx(H_CLEVELAND_BINARY, abs=1e-12)


def test_entropy_errors():
    with pytest.raises(EmptyDistribution):
        entropy([])
    with pytest.raises(EmptyDistribution):
        entropy([0, 0])
    with pytest.raises(EmptyDistribution):
        entropy([-1, 2])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0, 1e6), min_size=1, max_size=12).filter(lambda w: sum(w) > 0))
def test_entropy_bounds(weights):
    h = entropy(weights)
    support = sum(1 for w in weights if w > 0)
    assert -1e-12 <= h <= math.log2(max(support, 1)) + 1e-9


# -- prior entropy -------------------------------------------------------------------

def test_prior_entropy_examples():
    assert prior_entropy([0] * 10) == 0.0
    assert prior_entropy([0, 1] * 5) == pytest.approx(1.0)
    cleveland = [0] * 164 + [1] * 55 + [2] * 36 + [3] * 35 + [4] * 13
    assert prior_entropy(cleveland) == pytest.approx(H_CLEVELAND_BINARY, abs=1e-12)
    five = entropy([164, 55, 36, 35, 13])
    assert prior_entropy(cleveland, "multiclass") == pytest.approx(five)
    assert prior_entropy([0, 1, -1, -1]) == pytest.approx(1.0)
    with pytest.raises(EmptyDistribution):
        prior_entropy([-1, -1])


# -- mutual information -----------------------------------------------------------------

def test_mi_independent_is_zero():
    ds = table_dataset([[2, 2], [3, 3], [1, 1]])
    view = discretize(ds)
    assert mutual_information(44, view, ds.labels) == pytest.approx(0.0, abs=1e-12)


def test_mi_label_copy_is_label_entropy():
    ds = make_dataset({38: [0, 1, 0, 1, 0, 1]}, labels=[0, 1, 0, 1, 0, 1])
    assert mutual_information(38, discretize(ds), ds.labels) == pytest.approx(1.0, abs=1e-12)


def test_mi_excludes_missing_records():
    ds = make_dataset({38: [0, 1, np.nan, np.nan]}, labels=[0, 1, 1, 0])
    assert mutual_information(38, discretize(ds), ds.labels) == pytest.approx(1.0)
    none = make_dataset({38: [np.nan, np.nan]}, labels=[0, 1])
    with pytest.raises(NoCoverage):
        mutual_information(38, discretize(none), none.labels)


def test_mi_fixed_3x5_against_brute_force():
    counts = [[4, 0, 7, 1, 2], [3, 9, 0, 5, 1], [6, 2, 2, 0, 8]]
    ds = table_dataset(counts)
    got = mutual_information(44, discretize(ds), ds.labels)
    assert got == pytest.approx(brute_force_mi(counts), abs=1e-12)


@settings(max_examples=300, deadline=None)
@given(arrays(np.int64, st.tuples(st.integers(1, 6), st.integers(1, 5)), elements=st.integers(0, 50))
       .filter(lambda a: a.sum() > 0))
def test_mi_matches_brute_force(counts):
    table = ProbabilityTable(counts.astype(float))
    assert table.mutual_information() == pytest.approx(brute_force_mi(counts.tolist()), abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(arrays(np.int64, st.tuples(st.integers(1, 6), st.integers(1, 5)), elements=st.integers(0, 50))
       .filter(lambda a: a.sum() > 0),
       st.randoms(use_true_random=False))
def test_mi_symmetry_bounds_and_permutation(counts, rnd):
    t = ProbabilityTable(counts.astype(float))
    i = t.mutual_information()
    h_f, h_c, _ = t.entropies()
    assert i >= 0
    assert i <= min(h_f, h_c) + 1e-9
    assert ProbabilityTable(counts.T.astype(float)).mutual_information() == pytest.approx(i, abs=1e-12)
    rows = list(range(counts.shape[0]))
    cols = list(range(counts.shape[1]))
    rnd.shuffle(rows)
    rnd.shuffle(cols)
    permuted = counts[np.ix_(rows, cols)]
    assert ProbabilityTable(permuted.astype(float)).mutual_information() == pytest.approx(i, abs=1e-12)
    scaled = ProbabilityTable(3.0 * counts).mutual_information()
    assert scaled == pytest.approx(i, abs=1e-12)


def test_literal_mode_is_sum_of_entropies():
    counts = np.array([[3.0, 1.0], [2.0, 6.0]])
    t = ProbabilityTable(counts)
    h_f, h_c, h_fc = t.entropies()
    assert t.mutual_information("literal") == pytest.approx(h_fc + h_f + h_c)
    # the literal form exceeds the label entropy here, so S > 1
    assert t.mutual_information("literal") > h_c
    with pytest.raises(ValueError):
        t.mutual_information("other")


# -- significance and ranking -------------------------------------------------------------

def test_significance_examples():
    ds = make_dataset({38: [0, 1, 0, 1], 4: [0, 0, 1, 1]}, labels=[0, 2, 0, 4])
    view = discretize(ds)
    copy = significance(38, view, ds.labels)
    assert copy.S == pytest.approx(1.0) and copy.I0 == pytest.approx(1.0)
    independent = significance(4, view, ds.labels)
    assert independent.S == pytest.approx(0.0, abs=1e-12)


def test_significance_single_class_is_degenerate():
    ds = make_dataset({38: [0, 1, 0]}, labels=[2, 2, 2])
    with pytest.raises(DegenerateLabels):
        significance(38, discretize(ds), ds.labels)


def test_rank_label_copy_then_constant():
    ds = make_dataset({38: [0, 1, 0, 1, 0, 1], 4: [1] * 6}, labels=[0, 3, 0, 1, 0, 2])
    ranking = rank_symptoms(ds, FeatureSubset((4, 38)))
    assert [(s.attribute_id, s.rank) for s in ranking] == [(38, 1), (4, 2)]
    assert ranking[0].S == pytest.approx(1.0) and ranking[1].S == 0.0
    assert ranking[0].name == "exang"


def test_rank_one_attribute_and_empty():
    ds = make_dataset({38: [0, 1, 1, 0]}, labels=[0, 1, 1, 1])
    assert [s.rank for s in rank_symptoms(ds, FeatureSubset((38,)))] == [1]
    assert rank_symptoms(ds, FeatureSubset(())) == []


def test_rank_ties_break_to_lower_id():
    ds = make_dataset({38: [0, 1, 0, 1], 23: [0, 1, 0, 1]}, labels=[0, 1, 0, 1])
    assert [s.attribute_id for s in rank_symptoms(ds, (38, 23))] == [23, 38]


def test_rank_invariant_to_duplicating_records():
    ds = table_dataset([[4, 1], [1, 5], [2, 2]])
    ds2 = make_dataset({44: list(ds.column(44)) * 2, 38: [0, 1] * len(ds)},
                       labels=list(ds.labels) * 2)
    ds1 = make_dataset({44: ds.column(44), 38: [0, 1] * (len(ds) // 2) + [0] * (len(ds) % 2)},
                       labels=ds.labels)
    r1 = rank_symptoms(ds1, (38, 44))
    r2 = rank_symptoms(ds2, (38, 44))
    assert r1[0].attribute_id == r2[0].attribute_id == 44
    assert r1[0].S == pytest.approx(r2[0].S)


def test_ranking_csv_round_trip():
    ds = make_dataset({38: [0, 1, 0, 1, 1], 4: [1, 0, 0, 1, 1]}, labels=[0, 1, 0, 1, 1])
    ranking = rank_symptoms(ds, (4, 38))
    text = ranking_to_csv(ranking)
    assert text.splitlines()[0] == "rank,attribute_id,name,I_bits,I0_bits,S"
    assert ranking_from_csv(text) == ranking
