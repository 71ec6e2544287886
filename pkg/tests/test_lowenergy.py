import math

import numpy as np
import pytest

from thinguide.lowenergy import (Discretization, Quadrature, detect_resonance, discretize,
                                 free_kernel, laurent_matrix_elements, m_kernel,
                                 midpoint_quadrature, projectors, transition_matrix,
                                 birman_schwinger, identity_residual)
from thinguide.oracle import constants_from_asymptotics, shoot_zero_energy
from thinguide.potential import potential_from_curvature, single_well
from thinguide.geometry import BumpCurvature


def test_free_kernel_examples():
    assert free_kernel(1j, 0.3, 0.3) == pytest.approx(0.5, abs=1e-15)
    assert free_kernel(1j, 0.0, 1.0) == pytest.approx(math.exp(-1) / 2, abs=1e-15)
    rng = np.random.default_rng(3)
    t, tp = rng.uniform(-2, 2, (2, 20))
    k = 0.7 + 0.4j
    assert np.array_equal(free_kernel(k, t, tp), free_kernel(k, tp, t))
    with pytest.raises(ValueError):
        free_kernel(1.0, 0, 1)


def _two_node_well():
    pot = single_well(1.0, 1.0)
    quad = Quadrature(np.array([0.25, 0.75]), np.array([0.5, 0.5]))
    return Discretization(pot, quad, np.array([-1.0, -1.0]), np.array([1.0, 1.0]))


def test_m_kernel_examples():
    disc = _two_node_well()
    m0, m1 = m_kernel(0, disc), m_kernel(1, disc)
    assert m0[0, 1] == pytest.approx(0.25, abs=1e-16)
    assert m1[0, 1] == pytest.approx(0.0625, abs=1e-16)
    assert np.all(np.diag(m0) == 0)
    with pytest.raises(ValueError):
        m_kernel(-1, disc)


def test_projector_identities(triple):
    disc = discretize(triple, 401)
    P, Q = projectors(disc)
    assert np.linalg.norm(P @ P - P, 2) < 1e-12
    assert np.linalg.norm(Q @ Q - Q, 2) < 1e-12
    assert np.linalg.norm(P @ Q, 2) < 1e-12 and np.linalg.norm(Q @ P, 2) < 1e-12
    assert np.allclose(P @ disc.u, disc.u, atol=1e-12)
    assert np.max(np.abs(Q @ disc.u)) < 1e-12
    assert np.trace(P) == pytest.approx(1.0, abs=1e-12)


def test_vu_pairing_is_the_integral():
    pot = potential_from_curvature(BumpCurvature(2.0, -1.0, 1.0))
    disc = discretize(pot, 801)
    vu = disc.quad.dot(disc.v, disc.u)
    assert vu < 0
    assert vu == pytest.approx(pot.integral(), rel=1e-5)


def test_quadrature_respects_pieces(triple):
    q = midpoint_quadrature(triple, 801)
    assert q.N == 801
    assert q.weights.sum() == pytest.approx(triple.width, rel=1e-14)
    for knot in triple.breakpoints:
        assert not np.any(np.isclose(q.nodes, knot, atol=0, rtol=0))
    with pytest.raises(ValueError):
        midpoint_quadrature(triple, 20)


def test_resonant_and_non_resonant_wells(well_half, well_pi):
    res = detect_resonance(well_pi, 801)
    non = detect_resonance(well_half, 801)
    assert res.resonant and not non.resonant
    assert non.sigma_min > 0.1
    assert res.parity == "odd"
    assert abs(res.c1) / math.hypot(res.c1, res.c2) < 1e-3 and res.c2 > 0


def test_sigma_min_decreases_under_refinement(well_pi):
    sig = [detect_resonance(well_pi, n).sigma_min for n in (201, 401, 801)]
    assert sig[0] > sig[1] > sig[2]


def test_sigma_min_bounded_away_non_resonant(well_half):
    sig = [detect_resonance(well_half, n).sigma_min for n in (201, 401, 801)]
    assert min(sig) > 0.1
    assert max(sig) - min(sig) < 1e-3


def test_phi0_lies_in_range_of_q(well_2pi):
    rep = detect_resonance(well_2pi, 801)
    disc = discretize(well_2pi, 801)
    P, _ = projectors(disc)
    assert np.max(np.abs(P @ rep.phi0)) < 1e-10
    assert rep.parity == "even"
    assert abs(rep.c2) / math.hypot(rep.c1, rep.c2) < 1e-3
    assert rep.residual < 10 * rep.sigma_min + 1e-12


def test_cross_oracle_angle(triple):
    nys = detect_resonance(triple, 1601)
    c1, c2 = constants_from_asymptotics(shoot_zero_energy(triple))
    a = np.array([nys.c1, nys.c2]) / math.hypot(nys.c1, nys.c2)
    b = np.array([c1, c2]) / math.hypot(c1, c2)
    assert math.acos(min(1.0, float(a @ b))) < 1e-3
    assert nys.c1 * nys.c2 != 0


def test_transition_identity_residual(well_half):
    disc = discretize(well_half, 801)
    T = transition_matrix(disc, 1j)
    assert identity_residual(T, birman_schwinger(disc, 1j).real) < 1e-10
    with pytest.raises(ValueError):
        transition_matrix(disc, 1.0)


def test_transition_complex_k(well_half):
    disc = discretize(well_half, 401)
    k = 1.0 + 0.5j
    T = transition_matrix(disc, k)
    assert T.dtype.kind == "c"
    assert identity_residual(T, birman_schwinger(disc, k)) < 1e-10


def test_resonant_pole_residue_vanishes_on_u(well_pi):
    fit = laurent_matrix_elements(well_pi, np.geomspace(1e-3, 0.1, 12), N=801, tune=True)
    assert abs(fit["v,Tu"][0]) < 1e-6
    assert fit["tv,Ttu"][0] == pytest.approx(2.0, abs=1e-3)


def test_laurent_input_checks(well_half):
    with pytest.raises(ValueError):
        laurent_matrix_elements(well_half, [0.01, 0.02, 0.03])
    with pytest.raises(ValueError):
        laurent_matrix_elements(well_half, np.linspace(0.05, 0.3, 6))
