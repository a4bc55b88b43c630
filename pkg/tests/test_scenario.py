import json
import math
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from losmimo import Scenario, random_scenario, validate
from losmimo.scenario import ScenarioError


def test_deterministic_per_trial():
    a = random_scenario(11, 4, 3, 5, 10.0, -7.0)
    b = random_scenario(11, 4, 3, 5, 10.0, -7.0)
    assert a == b
    assert a != random_scenario(11, 5, 3, 5, 10.0, -7.0)
    assert a != random_scenario(12, 4, 3, 5, 10.0, -7.0)


def test_trial_streams_independent_of_order():
    forward = [random_scenario(3, t, 3, 5, 0.0, 0.0) for t in range(10)]
    backward = [random_scenario(3, t, 3, 5, 0.0, 0.0) for t in reversed(range(10))]
    assert forward == backward[::-1]


def test_no_interferers():
    s = random_scenario(0, 0, r=3, K=2, snr_db=10.0, sir_db=123.0)
    assert s.interferers == () and s.powers_interf == ()
    assert s.num_desired == 2


def test_paper_power_split():
    s = random_scenario(0, 0, r=3, K=5, snr_db=10.0, sir_db=-7.0)
    # 10**0.7 = 5.01187233627..., three equal shares
    assert sum(s.powers_interf) == pytest.approx(5.011872336272722, rel=1e-12)
    assert s.powers_interf == pytest.approx((1.670624112090907,) * 3, rel=1e-12)
    assert s.power_desired == 1.0
    assert s.noise_var == pytest.approx(0.1)


@given(
    snr=st.floats(-20, 40), sir=st.floats(-30, 30), r=st.integers(2, 5), extra=st.integers(1, 6)
)
@settings(max_examples=50)
def test_power_accounting(snr, sir, r, extra):
    s = random_scenario(1, 2, r, r - 1 + extra, snr, sir)
    assert math.fsum(s.powers_interf) == pytest.approx(10 ** (-sir / 10), rel=1e-9)
    assert s.noise_var == pytest.approx(10 ** (-snr / 10), rel=1e-12)
    assert len(s.desired) == r - 1 and len(s.interferers) == extra


@pytest.mark.parametrize("r,K", [(1, 3), (4, 2)])
def test_bad_dimensions(r, K):
    with pytest.raises(ScenarioError):
        random_scenario(0, 0, r, K, 10.0, 0.0)


def test_redraw_limit():
    with pytest.raises(ScenarioError, match="100 draws"):
        random_scenario(0, 0, 3, 8, 10.0, 0.0, separation_tol=0.5)


def test_identical_directions_violate():
    s = Scenario(desired=(1.0, 1.0), noise_var=1.0)
    report = validate(s, 1e-3)
    assert not report.ok
    assert [(v.first, v.second) for v in report.violations] == [(0, 1)]


def test_supplementary_angles_are_fine():
    s = Scenario(desired=(math.pi / 3,), interferers=(2 * math.pi / 3,), powers_interf=(1.0,))
    assert validate(s, 1e-3).ok


def test_half_tolerance_gap_violates():
    tol = 1e-3
    theta = 1.1
    other = math.acos(math.cos(theta) + tol / 2)
    s = Scenario(desired=(theta,), interferers=(other,), powers_interf=(1.0,))
    report = validate(s, tol)
    assert len(report.violations) == 1
    assert report.violations[0].cos_gap == pytest.approx(tol / 2, rel=1e-6)


def test_power_bound_reported():
    s = Scenario(desired=(1.0,), interferers=(2.0,), powers_interf=(3.0,))
    assert validate(s, power_max=2.0).problems
    assert validate(s, power_max=3.0).ok


def test_random_scenarios_pass_brute_force_check():
    for t in range(200):
        s = random_scenario(5, t, 3, 5, 10.0, -7.0)
        c = [math.cos(x) for x in s.desired + s.interferers]
        assert all(abs(a - b) > 1e-3 for a, b in combinations(c, 2))
        assert validate(s).ok


def test_angles_uniform():
    samples = np.concatenate(
        [random_scenario(99, t, 3, 5, 10.0, -7.0).directions for t in range(10_000)]
    )
    ks = stats.kstest(samples, stats.uniform(0, math.pi).cdf).statistic
    assert ks < 0.02


def test_json_round_trip():
    s = random_scenario(2, 0, 3, 5, 10.0, -7.0)
    doc = json.loads(s.to_json())
    assert set(doc) == {"desired_deg", "interferers_deg", "power_desired", "powers_interf", "noise_var"}
    back = Scenario.from_json(s.to_json())
    np.testing.assert_allclose(back.directions, s.directions, rtol=1e-14)
    assert back.powers_interf == s.powers_interf and back.noise_var == s.noise_var


def test_json_missing_key():
    with pytest.raises(ScenarioError, match="noise_var"):
        Scenario.from_dict({"desired_deg": [30.0]})


@pytest.mark.parametrize(
    "kwargs",
    [
        {"desired": ()},
        {"desired": (1.0,), "interferers": (2.0,)},
        {"desired": (1.0,), "noise_var": 0.0},
        {"desired": (1.0,), "power_desired": -1.0},
    ],
)
def test_inconsistent_scenarios(kwargs):
    with pytest.raises(ScenarioError):
        Scenario(**kwargs)
