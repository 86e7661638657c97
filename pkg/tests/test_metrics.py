import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from holder_condg.metrics import (FrontApproximation, combined_reference, metric_reports,
                                  nondominated_filter, nondominated_filter_pairwise,
                                  performance_profile, purity, spread_delta, spread_gamma)


def as_set(P):
    return {tuple(p) for p in np.asarray(P)}


def test_filter_examples():
    assert as_set(nondominated_filter([(1, 2), (2, 1), (2, 2)])) == {(1, 2), (2, 1)}
    assert as_set(nondominated_filter([(3, 4)])) == {(3, 4)}


def test_filter_matches_pairwise_on_random_points():
    P = np.random.default_rng(0).random((1000, 2))
    assert np.array_equal(nondominated_filter(P), nondominated_filter_pairwise(P))


point_sets = arrays(np.float64, st.tuples(st.integers(1, 40), st.integers(2, 3)),
                    elements=st.integers(0, 6).map(float))


@settings(max_examples=100, deadline=None)
@given(point_sets)
def test_filter_properties(P):
    nd = nondominated_filter(P)
    assert np.array_equal(nd, nondominated_filter_pairwise(P))
    assert np.array_equal(nondominated_filter(nd), nd)
    for u in nd:
        assert not any(np.all(v <= u) and np.any(v < u) for v in nd)


def test_purity_examples():
    A = FrontApproximation([(0, 2), (1, 1)], "A")
    B = FrontApproximation([(1, 1), (2, 0)], "B")
    ref = combined_reference([A, B])
    assert as_set(ref) == {(0, 2), (1, 1), (2, 0)}
    assert purity(A, ref) == 1.0 and purity(B, ref) == 1.0
    assert purity(FrontApproximation(ref), ref) == 1.0
    dominated = FrontApproximation([(3, 3), (4, 2.5)])
    assert purity(dominated, combined_reference([A, dominated])) == 0.0
    assert purity(FrontApproximation(np.empty((0, 2))), np.empty((0, 2))) == 1.0


def test_purity_matching_tolerance():
    ref = np.array([[0.0, 1.0]])
    assert purity(FrontApproximation([(1e-9, 1.0)]), ref) == 1.0
    assert purity(FrontApproximation([(1e-6, 1.0)]), ref) == 0.0


def test_deduplication():
    assert len(FrontApproximation([(0, 1), (0, 1 + 1e-10), (1, 0)])) == 2


def test_gamma_examples():
    assert spread_gamma(FrontApproximation([(0, 1), (1, 0)])) == 1.0
    assert spread_gamma(FrontApproximation([(0.3, 0.3)])) == 0.0
    t = np.linspace(0, 1, 11)
    assert spread_gamma(FrontApproximation(np.c_[t, 1 - t])) == pytest.approx(0.1)


def test_delta_examples():
    t = np.linspace(0, 1, 11)
    uniform = FrontApproximation(np.c_[t, 1 - t])
    assert spread_delta(uniform, [[0, 1], [0, 1]]) == pytest.approx(0.0, abs=1e-12)
    two = FrontApproximation([(0, 1), (1, 0)])
    assert spread_delta(two, [[0, 1], [0, 1]]) == 0.0
    three = FrontApproximation(np.c_[[0, 0.25, 1], [1, 0.75, 0]])
    # gaps 0.25, 0.75, mean 0.5: (0 + 0 + 0.25 + 0.25) / (0 + 0 + 2 * 0.5)
    assert spread_delta(three, [[0, 1], [0, 1]]) == pytest.approx(0.5)
    assert spread_delta(FrontApproximation([(0, 1)]), [[0, 1], [0, 1]]) is None


def test_delta_with_extremes_beyond_front():
    f = FrontApproximation(np.c_[[0.2, 0.4, 0.6], [0.6, 0.4, 0.2]])
    # gaps to extremes 0.2 each, interior gaps uniform
    assert spread_delta(f, [[0, 0.8], [0, 0.8]]) == pytest.approx(0.4 / (0.4 + 0.4))


@settings(max_examples=60, deadline=None)
@given(point_sets, st.randoms(use_true_random=False))
def test_spreads_permutation_invariant(P, rnd):
    f = FrontApproximation(P)
    perm = list(range(len(f)))
    rnd.shuffle(perm)
    g = FrontApproximation(f.points[perm])
    assert spread_gamma(f) == spread_gamma(g)
    ext = np.column_stack([P.min(axis=0), P.max(axis=0)])
    assert spread_delta(f, ext) == spread_delta(g, ext)


def test_profile_examples():
    # the unsolved middle column is dropped, so a lone solver solves everything left
    single = performance_profile([[1.0, np.nan, 3.0]])
    assert single[0] == [(1.0, 1.0)]
    same = performance_profile([[2.0, 3.0], [2.0, 3.0]])
    assert same[0][0] == (1.0, 1.0) and same[1][0] == (1.0, 1.0)
    assert performance_profile([[1, 2], [2, 1]]) == [[(1.0, 0.5), (2.0, 1.0)], [(1.0, 0.5), (2.0, 1.0)]]


def test_profile_purity_inversion():
    prof = performance_profile([[1.0, 0.5], [0.5, 0.0]], larger_is_better=True)
    # inverted costs [[1, 2], [2, inf]]
    assert prof[0] == [(1.0, 1.0)]
    assert prof[1] == [(1.0, 0.0), (2.0, 0.5)]


def test_profile_drops_unsolved_columns(caplog):
    prof = performance_profile([[1.0, np.nan], [2.0, np.nan]])
    assert prof[0] == [(1.0, 1.0)] and prof[1] == [(1.0, 0.0), (2.0, 1.0)]
    assert "dropping" in caplog.text


def test_profile_zero_best_cost():
    prof = performance_profile([[0.0, 1.0], [0.5, 1.0]])
    assert prof[0] == [(1.0, 1.0)]
    assert prof[1] == [(1.0, 0.5)]


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 4), st.integers(1, 8)),
              elements=st.one_of(st.just(np.nan), st.floats(0.1, 100))))
def test_profile_monotone(C):
    solved = ~np.all(np.isnan(C), axis=0)
    for s, steps in enumerate(performance_profile(C)):
        taus = [t for t, _ in steps]
        rhos = [r for _, r in steps]
        assert taus == sorted(taus) and np.all(np.diff(rhos) >= 0)
        if solved.any():
            assert rhos[-1] == pytest.approx(np.sum(~np.isnan(C[s]) & solved) / solved.sum())


def test_metric_reports_pairs():
    A = FrontApproximation([(0, 2), (1, 1), (1.5, 1.5)], "A")
    B = FrontApproximation([(1, 1), (2, 0)], "B")
    reps = metric_reports([A, B])
    assert reps["A"].n_points == 2 and reps["A"].purity == 1.0
    assert reps["B"].purity == 1.0
    assert reps["A"].gamma == 1.0 and reps["A"].delta is not None
