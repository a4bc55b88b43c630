import math
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from losmimo import (
    ArrayConfig,
    Scenario,
    SelectionError,
    SelectionSet,
    build_selection,
    covariance_beamformer,
    ergodic_search,
    exhaustive_oracle,
    pairwise_select,
    random_scenario,
    sinr,
    two_element,
)
from losmimo.array_model import gain_at
from losmimo.selection import achieved_delta, pairwise_selection


def scan_reference(spacing, thetas, i, delta, n_max, exclude=()):
    """Plain-Python scan, written independently of the vectorized search."""
    best = None
    for n in range(1, n_max + 1):
        if n in exclude:
            continue
        g = [1 + math.cos(2 * math.pi * spacing * n * math.cos(t)) for t in thetas]
        v = max([1 - g[i]] + [g[k] for k in range(len(g)) if k != i])
        if v < delta:
            return n, v, True
        if best is None or v < best[1]:
            best = (n, v)
    return best[0], best[1], False


def complex_gains(spacing, thetas, n):
    """Gains of (e_0 + e_n)/sqrt(2) from complex phasors; n is an array."""
    ph = np.exp(2j * np.pi * spacing * np.multiply.outer(n.astype(float), np.cos(thetas)))
    return np.abs(1 + ph) ** 2 / 2


@pytest.mark.parametrize("seed", range(6))
def test_search_matches_plain_scan(seed):
    cfg = ArrayConfig(100, 0.5)
    s = random_scenario(seed, 0, 3, 5, 10.0, -7.0)
    for delta in (0.3, 0.1, 1e-4):
        for i in range(2):
            out = ergodic_search(cfg, s, i, delta, 20_000)
            n, v, ok = scan_reference(0.5, s.directions, i, delta, 20_000)
            assert (out.companion, out.satisfied) == (n, ok)
            assert out.achieved_delta == pytest.approx(v, abs=1e-9)
            assert out.satisfied == (out.achieved_delta < delta)


def test_broadside_user_only_interferer_constraints_bind():
    cfg = ArrayConfig(100, 0.5)
    s = Scenario(desired=(math.pi / 2,), interferers=(0.7, 1.9, 2.6), powers_interf=(1, 1, 1))
    out = ergodic_search(cfg, s, 0, 0.05, 10**6)
    assert out.satisfied
    cos = np.cos(s.interferers)
    n = 1
    while max(1 + math.cos(2 * math.pi * 0.5 * n * c) for c in cos) >= 0.05:
        n += 1
    assert out.companion == n


def test_coincident_cosine_never_satisfied():
    cfg = ArrayConfig(100, 0.5)
    s = Scenario(desired=(1.0,), interferers=(1.0, 2.0), powers_interf=(1, 1))
    for n_max in (10, 10_000, 200_000):
        assert not ergodic_search(cfg, s, 0, 0.1, n_max).satisfied


def test_unsatisfied_returns_exhaustive_minimizer_over_million():
    cfg = ArrayConfig(100, 0.5)
    s = random_scenario(2024, 1, 3, 5, 10.0, -7.0)
    out = ergodic_search(cfg, s, 0, 1e-7, 10**6)
    assert not out.satisfied
    n = np.arange(1, 10**6 + 1)
    g = complex_gains(0.5, s.directions, n)
    v = np.maximum(1 - g[:, 0], g[:, 1:].max(axis=1))
    assert out.companion == int(n[np.argmin(v)])
    assert out.achieved_delta == pytest.approx(v.min(), abs=1e-9)


def test_satisfied_outcome_confirmed_by_full_gain_evaluation():
    cfg = ArrayConfig(100, 0.5)
    for t in range(20):
        s = random_scenario(31, t, 3, 5, 10.0, -7.0)
        for i in range(2):
            out = ergodic_search(cfg, s, i, 0.1, 10**6)
            if not out.satisfied:
                continue
            g = gain_at(cfg.spacing, two_element(out.companion), s.directions)
            assert g[i] > 1 - 0.1
            assert all(g[k] < 0.1 for k in range(5) if k != i)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), a=st.integers(1, 5000), b=st.integers(1, 5000))
def test_achieved_delta_monotone_in_n_max(seed, a, b):
    cfg = ArrayConfig(100, 0.5)
    s = random_scenario(seed, 0, 3, 5, 10.0, -7.0)
    lo, hi = sorted((a, b))
    assert (
        ergodic_search(cfg, s, 0, 0.02, hi).achieved_delta
        <= ergodic_search(cfg, s, 0, 0.02, lo).achieved_delta
    )


def test_exclusion_skips_indices():
    cfg = ArrayConfig(100, 0.5)
    s = random_scenario(5, 5, 3, 5, 10.0, -7.0)
    first = ergodic_search(cfg, s, 0, 0.1, 10**5)
    second = ergodic_search(cfg, s, 0, 0.1, 10**5, exclude=[first.companion])
    assert second.companion != first.companion
    n, _, _ = scan_reference(0.5, s.directions, 0, 0.1, 10**5, exclude={first.companion})
    assert second.companion == n
    with pytest.raises(SelectionError):
        ergodic_search(cfg, s, 0, 0.1, 2, exclude=[1, 2])


@pytest.mark.parametrize(
    "delta,n_max", [(0.0, 10), (1.0, 10), (0.1, 0)]
)
def test_search_argument_checks(delta, n_max):
    s = random_scenario(0, 0, 3, 5, 10.0, -7.0)
    with pytest.raises(ValueError):
        ergodic_search(ArrayConfig(), s, 0, delta, n_max)


def test_single_user_selection_equals_search():
    cfg = ArrayConfig(100, 0.5)
    s = random_scenario(1, 1, 2, 4, 10.0, -7.0)
    sel, outs = build_selection(cfg, s, 0.1, 10**5, virtual=True)
    assert sel.reference == 0
    assert sel.companions == (ergodic_search(cfg, s, 0, 0.1, 10**5).companion,)
    assert outs[0].displaced_from is None


def test_distinct_answers_kept():
    cfg = ArrayConfig(100, 0.5)
    s = random_scenario(3, 2, 3, 5, 10.0, -7.0)
    sel, outs = build_selection(cfg, s, 0.1, 10**6, virtual=True)
    direct = [ergodic_search(cfg, s, i, 0.1, 10**6).companion for i in range(2)]
    assert direct[0] != direct[1]
    assert list(sel.companions) == direct
    assert sel.support == tuple(sorted([0] + direct))


def test_collision_takes_next_best():
    cfg = ArrayConfig(100, 0.5)
    collided = 0
    for t in range(300):
        s = random_scenario(17, t, 3, 5, 10.0, -7.0)
        raw = [ergodic_search(cfg, s, i, 0.1, 4).companion for i in range(2)]
        if raw[0] != raw[1]:
            continue
        collided += 1
        sel, outs = build_selection(cfg, s, 0.1, 4, virtual=True)
        n, _, _ = scan_reference(0.5, s.directions, 1, 0.1, 4, exclude={raw[0]})
        assert sel.companions == (raw[0], n)
        assert outs[1].displaced_from == raw[0]
        assert outs[0].displaced_from is None
    assert collided > 0


def test_no_distinct_companion_raises():
    s = random_scenario(0, 0, 3, 5, 10.0, -7.0)
    with pytest.raises(SelectionError):
        build_selection(ArrayConfig(100), s, 0.1, 1, virtual=True)


def test_physical_mode_caps_companions():
    cfg = ArrayConfig(10, 0.5)
    for t in range(20):
        s = random_scenario(4, t, 3, 5, 10.0, -7.0)
        sel, _ = build_selection(cfg, s, 0.1, 10**6)
        sel.check_within(10)


def test_selection_set_invariants():
    with pytest.raises(ValueError):
        SelectionSet(0, (3, 3))
    with pytest.raises(ValueError):
        SelectionSet(0, (0, 2))
    with pytest.raises(ValueError):
        SelectionSet(0, (5,)).check_within(5)


def test_pairwise_no_interferers_ties_to_one():
    cfg = ArrayConfig(100, 0.5)
    s = Scenario(desired=(1.3,), noise_var=0.25)
    n, value = pairwise_select(cfg, s, 0, 99)
    assert n == 1
    assert value == pytest.approx(2 / 0.25, rel=1e-12)


def test_pairwise_finds_exact_null():
    # d*n*cos(theta_j) = 1/2 at n = 3 for cos(theta_j) = 1/3
    cfg = ArrayConfig(100, 0.5)
    s = Scenario(desired=(math.pi / 2,), interferers=(math.acos(1 / 3),), powers_interf=(4.0,),
                 noise_var=0.1)
    n, value = pairwise_select(cfg, s, 0, 8)
    assert n == 3
    assert value == pytest.approx(2 / 0.1, rel=1e-9)


@pytest.mark.parametrize("t", range(4))
def test_pairwise_matches_brute_force(t):
    cfg = ArrayConfig(100, 0.5)
    s = random_scenario(77, t, 3, 5, 10.0, -7.0)
    for i in range(2):
        values = [sinr(cfg, s, covariance_beamformer(cfg, s, (0, n), i), i) for n in range(1, 100)]
        n, value = pairwise_select(cfg, s, i, 99)
        assert value == pytest.approx(max(values), rel=1e-10)
        assert values[n - 1] >= max(values) * (1 - 1e-12)


def test_pairwise_limit_checked():
    s = random_scenario(0, 0, 3, 5, 10.0, -7.0)
    with pytest.raises(ValueError):
        pairwise_select(ArrayConfig(10), s, 0, 10)


def test_pairwise_selection_distinct():
    cfg = ArrayConfig(100, 0.5)
    for t in range(30):
        s = random_scenario(9, t, 4, 6, 10.0, -7.0)
        sel, sinrs = pairwise_selection(cfg, s)
        assert len(set(sel.companions)) == 3 and len(sinrs) == 3


def test_oracle_single_subset():
    cfg = ArrayConfig(3, 0.5)
    s = random_scenario(0, 0, 3, 5, 10.0, -7.0)
    sel, sinrs = exhaustive_oracle(cfg, s, 3)
    assert sel.support == (0, 1, 2)
    expected = [sinr(cfg, s, covariance_beamformer(cfg, s, (0, 1, 2), i), i) for i in range(2)]
    assert sinrs == pytest.approx(expected, rel=1e-10)


def test_oracle_tie_goes_to_first_subset():
    s = Scenario(desired=(0.8,), noise_var=0.5)
    sel, sinrs = exhaustive_oracle(ArrayConfig(4, 0.5), s, 2)
    assert sel.support == (0, 1)
    assert sinrs == pytest.approx([2 / 0.5])


def test_oracle_matches_enumeration():
    cfg = ArrayConfig(7, 0.5)
    for t in range(3):
        s = random_scenario(12, t, 3, 5, 10.0, -7.0)
        best, best_score = None, -math.inf
        for sub in combinations(range(7), 3):
            score = sum(
                math.log2(1 + sinr(cfg, s, covariance_beamformer(cfg, s, sub, i), i))
                for i in range(2)
            )
            if score > best_score + 1e-12:
                best, best_score = sub, score
        sel, sinrs = exhaustive_oracle(cfg, s, 3, batch=11)
        assert sel.support == best
        assert sum(math.log2(1 + x) for x in sinrs) == pytest.approx(best_score, rel=1e-10)


def test_oracle_dominates_pairwise():
    cfg = ArrayConfig(16, 0.5)
    for t in range(5):
        s = random_scenario(21, t, 3, 5, 10.0, -7.0)
        _, best = exhaustive_oracle(cfg, s, 3)
        _, pair = pairwise_selection(cfg, s, 15)
        assert sum(math.log2(1 + x) for x in best) >= sum(math.log2(1 + x) for x in pair) - 1e-12


def test_oracle_cap():
    s = random_scenario(0, 0, 3, 5, 10.0, -7.0)
    with pytest.raises(SelectionError):
        exhaustive_oracle(ArrayConfig(200), s, 3, cap=10**5)


@pytest.mark.parametrize("t", range(5))
def test_permuting_interferers_changes_nothing(t):
    cfg = ArrayConfig(24, 0.5)
    s = random_scenario(64, t, 3, 5, 10.0, -7.0)
    order = [2, 0, 1]
    p = Scenario(
        s.desired,
        tuple(s.interferers[k] for k in order),
        s.power_desired,
        tuple(s.powers_interf[k] for k in order),
        s.noise_var,
    )
    for i in range(2):
        assert ergodic_search(cfg, s, i, 0.1, 10**5) == ergodic_search(cfg, p, i, 0.1, 10**5)
        a, b = pairwise_select(cfg, s, i, 23), pairwise_select(cfg, p, i, 23)
        assert a[0] == b[0] and a[1] == pytest.approx(b[1], rel=1e-12)
    assert build_selection(cfg, s, 0.1, 10**4, virtual=True) == build_selection(
        cfg, p, 0.1, 10**4, virtual=True
    )
    (sa, va), (sb, vb) = exhaustive_oracle(cfg, s, 3), exhaustive_oracle(cfg, p, 3)
    assert sa == sb and va == pytest.approx(vb, rel=1e-12)


def test_achieved_delta_helper(cfg, paper_scenario):
    s = paper_scenario
    out = ergodic_search(cfg, s, 1, 0.1, 99)
    assert achieved_delta(cfg, s, 1, out.companion) == out.achieved_delta
