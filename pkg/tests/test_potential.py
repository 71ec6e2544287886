import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thinguide.geometry import (BumpCurvature, HypothesisError, PiecewiseCurvature,
                                switchback_curvature, triple_well_curvature)
from thinguide.potential import (piecewise_potential, potential_from_curvature, potential_from_dict,
                                 single_well, solve_triple_well_a1, triple_well,
                                 triple_well_sine_residual, triple_well_tan_residual, uv_split)


@pytest.mark.parametrize("x", [0.3, 0.5, 0.7])
def test_switchback_curvature_gives_single_well(x):
    a, b = 1.7, 1.0
    pot = potential_from_curvature(switchback_curvature(a, b, x))
    t = np.linspace(0.01, 0.99, 50)
    assert np.all(pot(t) == -a * a)
    assert pot.support == (0.0, b)
    assert np.all(pot(np.array([-0.5, 1.5])) == 0.0)


def test_triple_well_from_curvature():
    a, b = (3.0, 1.0, 6.0), (0.1, 0.2, 0.05)
    pot = potential_from_curvature(triple_well_curvature(*a, *b))
    assert np.array_equal(pot.piece_values(), -np.array(a) ** 2)
    ref = triple_well(*a, *b)
    t = np.linspace(-0.2, 0.3, 501)
    assert np.array_equal(pot(t), ref(t))
    assert ref.support == pytest.approx((-0.1, 0.25))


def test_zero_curvature_rejected():
    with pytest.raises(HypothesisError):
        potential_from_curvature(PiecewiseCurvature([(0.0, 0.0, 1.0)]))


def test_zero_integral_rejected():
    with pytest.raises(HypothesisError):
        piecewise_potential([(1.0, 0.0, 1.0), (-1.0, 1.0, 2.0)])


def test_uv_split_well():
    uv = uv_split(single_well(2.0, 1.0))
    t = np.array([0.1, 0.5, 0.9])
    assert np.all(uv.v(t) == 2.0) and np.all(uv.u(t) == -2.0)
    out = np.array([-1.0, 2.0])
    assert np.all(uv.u(out) == 0.0) and np.all(uv.v(out) == 0.0)


def test_uv_split_mixed_sign():
    uv = uv_split(piecewise_potential([(1.0, 0.0, 1.0), (-1.0, 1.0, 2.0)], nonzero_mean=False))
    t = np.array([0.5, 1.5])
    assert np.array_equal(uv.u(t), [1.0, -1.0])
    assert np.array_equal(uv.v(t), [1.0, 1.0])


def test_uv_round_trip_random_points():
    rng = np.random.default_rng(1)
    pot = potential_from_curvature(BumpCurvature(3.0, -1.0, 1.0, "odd"))
    uv = uv_split(pot)
    t = rng.uniform(-1.5, 1.5, 10_000)
    assert np.max(np.abs(uv.u(t) * uv.v(t) - pot(t))) < 1e-14
    assert np.all(uv.v(t) >= 0)
    # curvature-derived potentials are non-positive, so u = -v
    assert np.array_equal(uv.u(t), -uv.v(t))


def test_curvature_integral_identity():
    prof = switchback_curvature(1.3, 2.0, 0.7)
    pot = potential_from_curvature(prof)
    assert pot.integral() == pytest.approx(-0.25 * (2 * 1.3) ** 2 * 2.0, abs=1e-14)
    assert pot.integral() < 0


def test_single_well_parameters():
    pot = single_well(math.pi, 1.0)
    assert pot.piece_values()[0] == pytest.approx(-math.pi**2)
    with pytest.raises(ValueError):
        single_well(1.0, 0.0)
    with pytest.raises(ValueError):
        triple_well(1.0, 1.0, -1.0, 1.0, 1.0, 1.0)


def test_solve_triple_well_substitution():
    a1 = solve_triple_well_a1(1.0, 6.0, 0.4, 0.4, 0.4)
    res = triple_well_tan_residual(a1, 1.0, 6.0, 0.4 / a1, 0.4, 0.4 / 6.0)
    assert a1 > 0
    assert abs(res) < 1e-12 * a1 * 6.0


def test_solve_triple_well_preconditions():
    with pytest.raises(HypothesisError):
        solve_triple_well_a1(1.0, 1.0, 0.4, 0.4, 0.4)
    with pytest.raises(HypothesisError):
        solve_triple_well_a1(1.0, 6.0, 0.6, 0.6, 0.6)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.1, 5), st.floats(0.1, 5), st.floats(0.1, 5),
       st.floats(0.01, 0.5), st.floats(0.01, 0.5), st.floats(0.01, 0.5))
def test_sine_and_tan_forms_agree(a1, a2, a3, b1, b2, b3):
    c = math.cos(a1 * b1) * math.cos(a2 * b2) * math.cos(a3 * b3)
    if c < 1e-3:
        return
    sine = triple_well_sine_residual(a1, a2, a3, b1, b2, b3)
    tan = triple_well_tan_residual(a1, a2, a3, b1, b2, b3)
    assert sine == pytest.approx(c * tan, rel=1e-9, abs=1e-12)


def test_dict_round_trip():
    for pot in [single_well(2.0, 0.5), triple_well(1, 2, 3, 0.1, 0.2, 0.3),
                potential_from_curvature(BumpCurvature(2.0, -1, 1))]:
        back = potential_from_dict(pot.to_dict())
        t = np.linspace(-1.2, 1.2, 301)
        assert np.array_equal(back(t), pot(t))
