"""Zero-energy shooting: an ODE route to resonances independent of the integral equation.

The bounded zero-energy solution is constant to the left of the support, so
we start from ``(psi, psi') = (1, 0)`` and integrate ``psi'' = V psi`` to the
right edge. The potential is resonant exactly when ``psi'`` vanishes there.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.polynomial import polyval
from scipy.optimize import brentq

from . import kernels
from .potential import Potential1D


@dataclass(frozen=True)
class ShootResult:
    A: float
    B: float
    dB: float
    t: np.ndarray = field(repr=False)
    psi: np.ndarray = field(repr=False)
    dpsi: np.ndarray = field(repr=False)
    scale: float = 1.0

    def is_resonant(self, tol=1e-8):
        return abs(self.dB) <= tol * self.scale


def constant_step(value, length):
    """Exact transfer matrix of ``psi'' = value psi`` over ``length``."""
    if value < 0:
        w = math.sqrt(-value)
        c, s = math.cos(w * length), math.sin(w * length)
        return np.array([[c, s / w], [-w * s, c]])
    if value > 0:
        w = math.sqrt(value)
        c, s = math.cosh(w * length), math.sinh(w * length)
        return np.array([[c, s / w], [w * s, c]])
    return np.array([[1.0, length], [0.0, 1.0]])


def shoot_zero_energy(potential: Potential1D, steps=4000, exact=None, use_numba=None):
    """Shoot from the left plateau across the support.

    Piecewise-constant potentials use exact interval propagators unless
    ``exact=False``; otherwise each polynomial piece gets its share of
    ``steps`` fixed RK4 steps (at least 16).
    """
    if steps < 1000:
        raise ValueError("at least 1000 steps required")
    if exact is None:
        exact = potential.is_piecewise_constant()
    pp = potential.pp
    knots = pp.knots
    width = knots[-1] - knots[0]
    state = np.array([1.0, 0.0])
    ts, ps, ds = [knots[0]], [1.0], [0.0]
    for i, (a, b) in enumerate(zip(knots[:-1], knots[1:])):
        if exact:
            if len(pp.coefs[i]) > 1:
                raise ValueError("exact propagation needs a piecewise-constant potential")
            state = constant_step(pp.coefs[i][0], b - a) @ state
            ts.append(b)
            ps.append(state[0])
            ds.append(state[1])
            continue
        n = max(16, int(round(steps * (b - a) / width)))
        tt = np.linspace(a, b, n + 1)
        h = tt[1] - tt[0]
        # evaluate the local polynomial so jumps at the knots are never sampled
        c = pp.coefs[i]
        u = tt - a
        v0 = polyval(u[:-1], c) * np.ones(n)
        vm = polyval(u[:-1] + 0.5 * h, c) * np.ones(n)
        v1 = polyval(u[1:], c) * np.ones(n)
        p, d = kernels.rk4_shoot(v0, vm, v1, h, state[0], state[1], use_numba=use_numba)
        state = np.array([p[-1], d[-1]])
        ts.extend(tt[1:])
        ps.extend(p[1:])
        ds.extend(d[1:])
    scale = math.sqrt(max(pp.sup_abs(), 1e-300))
    return ShootResult(1.0, float(state[0]), float(state[1]), np.array(ts), np.array(ps),
                       np.array(ds), scale)


def resonance_margin(potential, steps=4000, exact=None):
    """``psi'`` at the right edge of the support; zero iff resonant."""
    return shoot_zero_energy(potential, steps, exact).dB


def tune_to_resonance(family, bracket, steps=4000, rtol=1e-14, maxiter=200):
    """Brent root of ``resonance_margin(family(p))`` inside ``bracket``."""
    lo, hi = map(float, bracket)
    f = lambda p: resonance_margin(family(p), steps)
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise ValueError(f"no sign change of the margin on [{lo}, {hi}]")
    return brentq(f, lo, hi, xtol=1e-15, rtol=rtol, maxiter=maxiter)


def sign_convention(c1, c2, tol=1e-8):
    """Fix the overall sign: ``c1 >= 0``, or ``c2 > 0`` when ``c1`` is negligible."""
    norm = math.hypot(c1, c2)
    if norm == 0:
        raise ValueError("constants vanish simultaneously")
    if abs(c1) < tol * norm:
        return (c1, c2) if c2 > 0 else (-c1, -c2)
    return (c1, c2) if c1 > 0 else (-c1, -c2)


def constants_from_plateaus(A, B):
    """Resonance constants from the left/right plateaus of the resonant solution.

    Integrating the defining integrals by parts against ``psi'' = V psi``
    gives ``c1 = -(A + B)/2`` and ``c2 = (B - A)/2``; the result is returned
    after :func:`sign_convention`.
    """
    return sign_convention(-(A + B) / 2, (B - A) / 2)


def constants_from_asymptotics(result: ShootResult, tol=1e-8):
    if not result.is_resonant(tol):
        raise ValueError(f"not resonant: right-edge slope {result.dB:.3e}")
    return constants_from_plateaus(result.A, result.B)


def scan_margin(family, values, steps=4000):
    """Margins over ``values`` plus Brent-refined roots at each sign change."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("empty sweep")
    margins = np.array([resonance_margin(family(p), steps) for p in values])
    roots = []
    for i in range(values.size - 1):
        if margins[i] == 0.0:
            roots.append(float(values[i]))
        elif np.sign(margins[i]) * np.sign(margins[i + 1]) < 0:
            roots.append(float(tune_to_resonance(family, (values[i], values[i + 1]), steps)))
    if margins[-1] == 0.0:
        roots.append(float(values[-1]))
    return margins, roots
