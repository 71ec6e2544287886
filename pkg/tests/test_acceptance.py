"""The ten acceptance criteria, at their stated tolerances.

Each test collects named checks, records a one-line verdict (printed in the
terminal summary by ``conftest.py``) and then asserts every check.
"""
import math
import time
from fractions import Fraction

import numpy as np

from conftest import ACCEPTANCE
from thinguide.geometry import (PiecewiseCurvature, switchback_curvature, reconstruct_curve,
                                self_intersects, smooth_curvature)
from thinguide.lowenergy import detect_resonance, laurent_matrix_elements, transition_norm_slope
from thinguide.oracle import (constants_from_asymptotics, resonance_margin, shoot_zero_energy,
                              tune_to_resonance)
from thinguide.pointlimit import (DIRICHLET, FREE, PointInteraction, amplitudes_from_eigenfunction,
                                  apply_resolvent, eigenfunction, evolve, free_gaussian,
                                  free_propagator, gaussian_packet, propagator_kernel,
                                  resolvent_kernel, scattering_matrix, symmetric_grid,
                                  transmission_probability, weak_residual)
from thinguide.potential import (potential_from_curvature, single_well, solve_triple_well_a1,
                                 triple_well, triple_well_tan_residual)
from thinguide.scaled1d import convergence_study_1d, limit_for
from thinguide.strip2d import convergence_study_2d

GL_X, GL_W = np.polynomial.legendre.leggauss(40)


def _record(number, title, checks, detail):
    failed = [name for name, ok in checks.items() if not ok]
    passed = not failed
    ACCEPTANCE[number] = (passed, title, detail + ("" if passed else f" [failed: {', '.join(failed)}]"))
    assert passed, f"criterion {number} failed checks: {failed} ({detail})"


def _angle(a, b):
    a = np.asarray(a, dtype=float) / math.hypot(*a)
    b = np.asarray(b, dtype=float) / math.hypot(*b)
    return math.acos(min(1.0, float(a @ b)))


def _well_family(b=1.0):
    return lambda a: single_well(a, b)


def test_criterion_01_square_well_resonance():
    t0 = time.perf_counter()
    roots = [tune_to_resonance(_well_family(), (3.0, 4.0)),
             tune_to_resonance(_well_family(), (6.0, 7.0))]
    sig = [detect_resonance(single_well(r, 1.0), 1601).sigma_min for r in roots]
    sig_half = detect_resonance(single_well(math.pi / 2, 1.0), 1601).sigma_min
    elapsed = time.perf_counter() - t0
    checks = {"root_pi": abs(roots[0] - math.pi) < 1e-10,
              "root_2pi": abs(roots[1] - 2 * math.pi) < 1e-10,
              "sigma_at_roots": max(sig) < 1e-4,
              "sigma_half_pi": sig_half > 1e-1,
              "runtime": elapsed < 10.0}
    _record(1, "square-well resonance criterion", checks,
            f"roots-(pi,2pi)=({roots[0] - math.pi:.1e},{roots[1] - 2 * math.pi:.1e}) "
            f"sigma_min=({sig[0]:.2e},{sig[1]:.2e}) at pi/2 {sig_half:.3f}, {elapsed:.1f}s")


def test_criterion_02_parity_dichotomy(well_pi, well_2pi):
    odd = detect_resonance(well_pi, 1601)
    even = detect_resonance(well_2pi, 1601)
    odd_ode = constants_from_asymptotics(shoot_zero_energy(well_pi))
    even_ode = constants_from_asymptotics(shoot_zero_energy(well_2pi))
    c1_frac = abs(odd.c1) / math.hypot(odd.c1, odd.c2)
    c2_frac = abs(even.c2) / math.hypot(even.c1, even.c2)
    angles = (_angle((odd.c1, odd.c2), odd_ode), _angle((even.c1, even.c2), even_ode))
    checks = {"odd_c1_vanishes": c1_frac < 1e-3, "even_c2_vanishes": c2_frac < 1e-3,
              "odd_parity": odd.parity == "odd", "even_parity": even.parity == "even",
              "oracles_agree": max(angles) < 1e-3}
    _record(2, "parity dichotomy", checks,
            f"|c1|/|c| (pi)={c1_frac:.1e} |c2|/|c| (2pi)={c2_frac:.1e} "
            f"oracle angles=({angles[0]:.1e},{angles[1]:.1e}) rad")


def test_criterion_03_triple_well():
    a2, a3, beta = 1.0, 6.0, 0.4
    a1 = solve_triple_well_a1(a2, a3, beta, beta, beta)
    b = (beta / a1, beta / a2, beta / a3)
    residual = triple_well_tan_residual(a1, a2, a3, *b)
    pot = triple_well(a1, a2, a3, *b)
    margin = resonance_margin(pot)
    c1, c2 = constants_from_asymptotics(shoot_zero_energy(pot))
    sc = scattering_matrix(PointInteraction.resonant(c1, c2))
    # the amplitudes are rational in (c1, c2); check the identity in exact arithmetic
    f1, f2 = Fraction(c1), Fraction(c2)
    n = f1 * f1 + f2 * f2
    exact_T, exact_R = (f1 * f1 - f2 * f2) / n, 2 * f1 * f2 / n
    checks = {"closed_form_residual": abs(residual) < 1e-12, "oracle_margin": abs(margin) < 1e-8,
              "nontrivial_reflection": c1 * c2 != 0 and abs(sc.R_plus) > 1e-6,
              "unitarity_exact": exact_T**2 + exact_R**2 == 1,
              "unitarity_float": abs(sc.unitarity_defect()) <= 4 * np.finfo(float).eps}
    _record(3, "triple-well construction", checks,
            f"a1={a1:.12g} residual={residual:.1e} dB={margin:.1e} (c1,c2)=({c1:.4g},{c2:.4g}) "
            f"T={sc.T:.4f} R={sc.R_plus:.4f}")


def test_criterion_04_scattering():
    op = PointInteraction.resonant(2, 1)
    sc = scattering_matrix(op)
    amps = [amplitudes_from_eigenfunction(op, p) for p in (0.5, 1.0, 2.0, 5.0)]
    spread = max(max(abs(T - sc.T), abs(R - sc.R_plus)) for T, R in amps)
    weak = max(weak_residual(op, lambda s, p=p, br=br: eigenfunction(op, p, br, s), p * p)
               for p in (0.5, 1.0, 2.0, 5.0) for br in "+-")
    checks = {"T": sc.T == 3 / 5, "R_plus": sc.R_plus == 4 / 5, "R_minus": sc.R_minus == -4 / 5,
              "energy_independent": spread < 1e-14, "weak_identity": weak < 1e-8}
    _record(4, "scattering formulas", checks,
            f"T={sc.T} R+={sc.R_plus} R-={sc.R_minus} amplitude spread={spread:.1e} "
            f"weak residual={weak:.1e}")


def _compose(op, p, k, t, tp, L=40.0):
    knots = np.unique([-L, L, 0.0, t, tp])
    total = 0.0
    for a, b in zip(knots[:-1], knots[1:]):
        edges = np.linspace(a, b, int(np.ceil(b - a)) + 1)
        for lo, hi in zip(edges[:-1], edges[1:]):
            s = 0.5 * (hi - lo) * GL_X + 0.5 * (hi + lo)
            vals = resolvent_kernel(op, p, t, s) * resolvent_kernel(op, k, s, tp)
            total += 0.5 * (hi - lo) * np.sum(GL_W * vals)
    return total


def test_criterion_05_resolvent_structure():
    k, p = 0.5 + 1.0j, 1.5j
    ops = [PointInteraction.resonant(2, 1), PointInteraction.resonant(0, 1), DIRICHLET]
    pairs = [(1.0, -0.5), (-2.0, -0.7), (0.4, 1.3)]
    ident = max(abs(resolvent_kernel(op, k, t, tp) - resolvent_kernel(op, p, t, tp)
                    - (k * k - p * p) * _compose(op, p, k, t, tp))
                for op in ops for t, tp in pairs)
    tp = np.linspace(-5, 5, 201)
    dirichlet0 = max(float(np.max(np.abs(resolvent_kernel(DIRICHLET, kk, 0.0, tp))))
                     for kk in (1j, 0.3 + 2j, -1 + 0.5j))
    rng = np.random.default_rng(7)
    t1, t2 = rng.uniform(-3, 3, (2, 20))
    proj = 0.0
    for c in rng.uniform(-5, 5, (50, 2)):
        base = PointInteraction.resonant(*c)
        for lam in (-3.0, 0.5, 7.0):
            other = PointInteraction.resonant(lam * c[0], lam * c[1])
            proj = max(proj, float(np.max(np.abs(resolvent_kernel(base, k, t1, t2)
                                                 - resolvent_kernel(other, k, t1, t2)))),
                       float(np.max(np.abs(propagator_kernel(base, 0.6, t1, t2)
                                           - propagator_kernel(other, 0.6, t1, t2)))),
                       abs(scattering_matrix(base).T - scattering_matrix(other).T),
                       abs(scattering_matrix(base).R_plus - scattering_matrix(other).R_plus))
    x = symmetric_grid(30.0, 1e-3)
    bc = 0.0
    for c in ((2, 1), (0, 1), (-0.4, 1.7), (1, 0)):
        op = PointInteraction.resonant(*c)
        for center in (-2.5, 2.0):
            out = apply_resolvent(op, 1 + 1j, x, np.exp(-4 * (x - center) ** 2))
            bc = max(bc, *out.boundary_residuals(op))
    checks = {"resolvent_identity": ident < 1e-8, "dirichlet_origin": dirichlet0 < 1e-15,
              "projective_invariance": proj < 1e-14, "boundary_conditions": bc < 1e-8}
    _record(5, "resolvent structure", checks,
            f"identity={ident:.1e} dirichlet(0,.)={dirichlet0:.1e} projective={proj:.1e} "
            f"boundary={bc:.1e}")


def test_criterion_06_laurent(well_half, well_pi):
    t0 = time.perf_counter()
    # Laurent fits use small kappa so the truncated series dominates; the norm slopes
    # use the full [1e-3, 1e-1] window
    kappas = np.geomspace(1e-3, 2e-2, 8)
    non = laurent_matrix_elements(well_half, kappas, N=801)
    res = laurent_matrix_elements(well_pi, kappas, N=801, tune=True)
    slope_kappas = np.geomspace(1e-3, 1e-1, 9)
    slope_res, _ = transition_norm_slope(well_pi, slope_kappas)
    slope_non, _ = transition_norm_slope(well_half, slope_kappas)
    elapsed = time.perf_counter() - t0
    v_t1_u = non["v,Tu"][2]
    tv_tm1_tu = res["tv,Ttu"][0]
    checks = {"non_resonant_t1": abs(v_t1_u + 2) < 1e-3,
              "resonant_t_minus1": abs(tv_tm1_tu - 2) < 1e-3,
              "slope_resonant": abs(slope_res + 1) < 0.05, "slope_non_resonant": abs(slope_non) < 0.05,
              "runtime": elapsed < 30.0}
    _record(6, "Laurent identities", checks,
            f"(v,t1u)={v_t1_u:.7f} ((.)v,t-1u(.))={tv_tm1_tu:.7f} slopes=({slope_res:.4f},"
            f"{slope_non:.4f}) {elapsed:.1f}s")


def test_criterion_07_convergence_1d(well_half, well_pi, well_2pi):
    t0 = time.perf_counter()
    eps = (0.4, 0.2, 0.1, 0.05)
    parts, checks = [], {}
    for name, pot in (("pi/2", well_half), ("pi", well_pi), ("2pi", well_2pi)):
        op, _ = limit_for(pot)
        wrong = FREE if not op.is_resonant else DIRICHLET
        tab = convergence_study_1d(pot, op, 1j, eps, controls=(wrong,))
        ctrl = next(iter(tab.extra["controls"].values()))
        checks[f"{name}_monotone"] = tab.monotone
        checks[f"{name}_control_plateau"] = ctrl[-1] >= 0.5 * ctrl[0]
        if op.is_resonant:
            checks[f"{name}_slope"] = tab.slope >= 0.3
        parts.append(f"{name}: {op.kind} slope={tab.slope:.2f} err={tab.errors[-1]:.1e} "
                     f"control={ctrl[0]:.2f}->{ctrl[-1]:.2f}")
    elapsed = time.perf_counter() - t0
    checks["runtime"] = elapsed < 120.0
    _record(7, "1D scaled-resolvent convergence", checks, "; ".join(parts) + f"; {elapsed:.1f}s")


def test_criterion_08_convergence_2d(strip_curvature):
    t0 = time.perf_counter()
    op, rep = limit_for(potential_from_curvature(strip_curvature))
    study = convergence_study_2d(strip_curvature, op, 3.0, 1.0, 1j, (0.4, 0.3, 0.2, 0.15),
                                 controls=(DIRICHLET,))
    elapsed = time.perf_counter() - t0
    ctrl = study.diagonal.extra["controls"]["dirichlet:0:0"]
    checks = {"limit_resonant": op.is_resonant, "diagonal_monotone": study.diagonal.monotone,
              "off_diagonal_halved": study.off_diagonal_drop >= 2.0,
              "refinement_subdominant": study.refinement_ok,
              "truncation_subdominant": study.truncation_change < study.min_step_change,
              "control_plateau": ctrl[-1] >= 0.5 * ctrl[0], "runtime": elapsed < 600.0}
    d = study.diagonal.errors
    _record(8, "2D strip convergence", checks,
            f"diag {d[0]:.3e}->{d[-1]:.3e} (slope {study.diagonal.slope:.2f}) "
            f"off-diagonal drop x{study.off_diagonal_drop:.1f} refinement "
            f"{study.refinement_change:.1e} < step {study.min_step_change:.1e} "
            f"control {ctrl[0]:.2f}->{ctrl[-1]:.2f}, {elapsed:.1f}s")


def test_criterion_09_geometry():
    a, b = math.pi, 1.0
    xs = np.linspace(0.05, 0.95, 19)
    angle_err = max(abs(switchback_curvature(a, b, x).total_angle() - 2 * a * (2 * x - b)) for x in xs)
    crossing = {x: self_intersects(reconstruct_curve(switchback_curvature(a, b, x), -3, b + 3, 1e-3))[0]
                for x in (0.3, 0.5, 0.7)}
    straight = self_intersects(reconstruct_curve(PiecewiseCurvature([(0.0, 0.0, 1.0)]), -1, 2, 1e-3))[0]
    loop = self_intersects(reconstruct_curve(PiecewiseCurvature([(1.0, 0.0, 2 * math.pi + 0.1)]),
                                             -1, 2 * math.pi + 1.1, 1e-3))[0]
    base = PiecewiseCurvature([(2.0, 0.0, 0.5), (-3.0, 0.5, 1.0)])
    sm = smooth_curvature(base, 0.1, 2.0)
    delta, levels = sm.delta, [0.0, 2.0, -3.0, 0.0]
    values_exact, slope_worst = True, 0.0
    for i, knot in enumerate((0.0, 0.5, 1.0)):
        ends = np.array([knot - delta, knot + delta])
        values_exact &= bool(sm(ends)[0] == levels[i] and sm(ends)[1] == levels[i + 1])
        scale = abs(levels[i + 1] - levels[i]) / delta
        slope_worst = max(slope_worst, float(np.max(np.abs(sm.derivative(ends)))) / scale)
    checks = {"total_angle": angle_err < 1e-14, "no_crossing": not any(crossing.values()),
              "straight_control": not straight, "full_circle_control": loop,
              "smoothing_values": values_exact, "smoothing_slopes": slope_worst < 1e-13}
    _record(9, "geometry", checks,
            f"angle error={angle_err:.1e} crossings={sum(crossing.values())}/3 "
            f"straight={straight} circle={loop} smoothing slope/scale={slope_worst:.1e}")


def test_criterion_10_propagator():
    rng = np.random.default_rng(11)
    xs, ys = rng.uniform(-5, 5, (2, 200))
    reduction = all(np.array_equal(propagator_kernel(PointInteraction.resonant(c, 0.0), t, xs, ys),
                                   free_propagator(t, xs - ys))
                    for c in (1.0, -2.5) for t in (0.1, 1.0))
    x = symmetric_grid(40.0, 1e-2)
    psi0 = gaussian_packet(x, -10.0, 10.0, 1.0)
    times = np.linspace(0.0, 1.0, 11)
    drift = 0.0
    for op in (PointInteraction.resonant(2, 1), PointInteraction.resonant(0, 1)):
        snaps = evolve(op, x, psi0, times)
        drift = max(drift, max(abs(s.norm - snaps[0].norm) for s in snaps))
    last = snaps[-1]
    trans = transmission_probability(x, last.psi)
    right = x > 0
    flip = np.max(np.abs(last.psi[right] + free_gaussian(x[right], 1.0, -10.0, 10.0, 1.0)))
    checks = {"free_reduction": reduction, "norm_drift": drift < 1e-4,
              "transmission": abs(trans - 1) < 1e-3, "amplitude_minus_one": flip < 1e-3}
    _record(10, "propagator", checks,
            f"drift={drift:.1e} transmission={trans:.6f} |psi + free|={flip:.1e}")
