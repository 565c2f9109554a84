import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from enrich.errors import InputError
from enrich.quality import (QualityConstants, class_mos, effective_latency,
                            mos_from_r, r_factor)
from enrich.shaper import ClassMetrics, ShaperConfig, simulate


@pytest.mark.parametrize("lat, jit, expected", [(20, 5, 40), (0, 0, 10), (100, 50, 210)])
def test_effective_latency(lat, jit, expected):
    assert effective_latency(lat, jit) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("eff, loss, expected", [(40, 0, 92), (600, 0, 0), (40, 2, 87)])
def test_r_factor(eff, loss, expected):
    assert r_factor(eff, loss) == pytest.approx(expected, abs=1e-12)


def test_r_factor_branch_edge():
    # both branches agree at 160 only up to the 1-point kink in the formula
    assert r_factor(159.999, 0) == pytest.approx(93 - 159.999 / 40)
    assert r_factor(160, 0) == pytest.approx(93 - 1.0)


def test_mos_endpoints():
    assert mos_from_r(0) == 1.0
    assert mos_from_r(100) == pytest.approx(4.5)
    assert 4.40 <= mos_from_r(93) <= 4.41


def test_mos_matches_g107_cubic():
    # independent evaluation of 1 + 0.035R + 7e-6 R(R-60)(100-R)
    for r in np.linspace(10, 99, 40):
        assert mos_from_r(r) == pytest.approx(1 + 0.035 * r + 7e-6 * r * (r - 60) * (100 - r))


@pytest.mark.parametrize("bad", [-1, 101, float("nan")])
def test_mos_rejects_out_of_range(bad):
    with pytest.raises(InputError):
        mos_from_r(bad)


def test_bad_quality_inputs():
    with pytest.raises(InputError):
        effective_latency(-1, 0)
    with pytest.raises(InputError):
        r_factor(10, 120)


def test_idle_network_all_good():
    m = simulate(ShaperConfig(), np.zeros(8))
    assert np.all(class_mos(m) > 4.0)


def test_full_loss_floors_mos():
    m = ClassMetrics(alloc=np.zeros(2), latency_ms=np.array([10.0, 10.0]),
                     jitter_ms=np.zeros(2), loss_pct=np.array([100.0, 0.0]))
    mos = class_mos(m)
    assert mos[0] == 1.0
    assert mos[1] > 4.0


def test_constants_round_trip():
    c = QualityConstants(loss_penalty=3.0)
    assert QualityConstants.from_dict(c.to_dict()) == c


@settings(max_examples=300, deadline=None)
@given(st.floats(0, 3000), st.floats(0, 3000), st.floats(0, 100), st.floats(0, 100))
def test_mos_non_increasing_in_latency_and_loss(e1, e2, l1, l2):
    lo_e, hi_e = sorted((e1, e2))
    lo_l, hi_l = sorted((l1, l2))
    assert mos_from_r(r_factor(hi_e, lo_l)) <= mos_from_r(r_factor(lo_e, lo_l)) + 1e-12
    assert mos_from_r(r_factor(lo_e, hi_l)) <= mos_from_r(r_factor(lo_e, lo_l)) + 1e-12


@settings(max_examples=300, deadline=None)
@given(st.floats(0, 100))
def test_mos_range(r):
    assert 1.0 <= mos_from_r(r) <= 4.5


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 1000), st.floats(0, 500))
def test_jitter_slope_is_impact(lat, jit):
    c = QualityConstants()
    slope = effective_latency(lat, jit + 1.0, c) - effective_latency(lat, jit, c)
    assert slope == pytest.approx(c.latency_impact, abs=1e-9)
