"""Planar curves from signed curvature.

Curvature profiles are compactly supported piecewise polynomials in the
arc length ``t``. The tangent angle is fixed to 0 left of the support and
reconstructed curves start at the origin; everything else is defined up to
that rigid motion.
"""
import csv
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from . import kernels
from ._pp import PiecewisePolynomial


class HypothesisError(ValueError):
    """A standing assumption of the thin-waveguide model is violated."""


class CurvatureProfile:
    """Signed curvature ``gamma(t)`` with compact support."""

    kind = "abstract"

    def __init__(self, pp):
        self.pp = pp

    def __call__(self, t):
        return self.pp(t)

    def derivative(self, t, order=1):
        return self.pp(t, nu=order)

    def angle(self, t):
        """Tangent angle ``int_{-inf}^t gamma``."""
        return self.pp.antiderivative(t)

    @property
    def support(self):
        return self.pp.support

    @property
    def breakpoints(self):
        return self.pp.knots.copy()

    def total_angle(self):
        return self.pp.integral()

    def sup_abs(self):
        return self.pp.sup_abs()

    def to_dict(self):
        raise NotImplementedError


class PiecewiseCurvature(CurvatureProfile):
    """Piecewise-constant curvature, given as ``(value, start, end)`` segments.

    Gaps between segments are filled with zero curvature.
    """

    kind = "piecewise"

    def __init__(self, segments):
        segs = [(float(v), float(a), float(b)) for v, a, b in segments]
        if not segs:
            raise ValueError("at least one segment required")
        for v, a, b in segs:
            if not b > a:
                raise ValueError(f"segment [{a}, {b}] has non-positive length")
        for (_, _, b0), (_, a1, _) in zip(segs, segs[1:]):
            if a1 < b0:
                raise ValueError("segments must be ordered and non-overlapping")
        knots = [segs[0][1]]
        coefs = []
        for v, a, b in segs:
            if a > knots[-1]:
                knots.append(a)
                coefs.append([0.0])
            knots.append(b)
            coefs.append([v])
        super().__init__(PiecewisePolynomial(knots, coefs))
        self.segments = tuple(segs)

    @property
    def values(self):
        return np.array([c[0] for c in self.pp.coefs])

    def total_angle(self):
        return float(sum(v * (b - a) for v, a, b in self.segments))

    def to_dict(self):
        return {"kind": "piecewise",
                "segments": [{"value": v, "from": a, "to": b} for v, a, b in self.segments]}


_ODD_PEAK = (1 / math.sqrt(7)) * (6 / 7) ** 3


class BumpCurvature(CurvatureProfile):
    """C^2 polynomial bump on ``[start, end]`` with peak ``|gamma| = amplitude``.

    ``parity="even"`` gives ``A (1 - x^2)^3``; ``parity="odd"`` gives the
    S-shaped ``A x (1 - x^2)^3 / max`` whose total turning angle is zero.
    ``x`` maps the support onto ``[-1, 1]``.
    """

    kind = "bump"

    def __init__(self, amplitude, start, end, parity="even"):
        if not end > start:
            raise ValueError("bump support must have positive length")
        if parity not in ("even", "odd"):
            raise ValueError("parity must be 'even' or 'odd'")
        self.amplitude = float(amplitude)
        self.start = float(start)
        self.end = float(end)
        self.parity = parity
        shape = Polynomial([1, 0, -1]) ** 3
        if parity == "odd":
            shape = Polynomial([0, 1]) * shape / _ODD_PEAK
        x_of_u = Polynomial([-1.0, 2.0 / (self.end - self.start)])
        poly = self.amplitude * shape(x_of_u)
        super().__init__(PiecewisePolynomial([self.start, self.end], [poly.coef]))

    def with_amplitude(self, amplitude):
        return BumpCurvature(amplitude, self.start, self.end, self.parity)

    def to_dict(self):
        d = {"kind": "bump", "amplitude": self.amplitude, "from": self.start, "to": self.end}
        if self.parity != "even":
            d["parity"] = self.parity
        return d


class SmoothedCurvature(CurvatureProfile):
    """C^1 quadratic blend of a piecewise-constant profile over windows of half-width ``eps**beta``."""

    kind = "smoothed"

    def __init__(self, base, eps, beta):
        if not isinstance(base, PiecewiseCurvature):
            raise TypeError("smoothing needs a piecewise-constant base profile")
        xs = base.pp.knots
        cs = np.concatenate([[0.0], base.values, [0.0]])
        delta = float(eps) ** float(beta)
        gap = float(np.min(np.diff(xs)))
        if not (eps > 0 and delta < 0.5 * gap):
            raise HypothesisError(
                f"smoothing width eps**beta = {delta:.3g} must be below half the "
                f"minimal breakpoint spacing ({0.5 * gap:.3g})")
        self.base, self.eps, self.beta, self.delta = base, float(eps), float(beta), delta
        knots, coefs = [], []
        for i, xi in enumerate(xs):
            lo, hi = cs[i], cs[i + 1]
            jump = hi - lo
            mean = 0.5 * (hi + lo)
            s = Polynomial([-delta, 1.0])  # t - x_i in terms of t - (x_i - delta)
            left = jump / (2 * delta**2) * s**2 + jump / delta * s + mean
            right = -jump / (2 * delta**2) * Polynomial([0, 1]) ** 2 \
                + jump / delta * Polynomial([0, 1]) + mean
            knots += [xi - delta, xi]
            coefs += [left.coef, right.coef]
            if i + 1 < len(xs):
                knots.append(xi + delta)
                coefs.append([hi])
        knots.append(xs[-1] + delta)
        super().__init__(PiecewisePolynomial(knots, coefs))

    def to_dict(self):
        return {"kind": "smoothed", "base": self.base.to_dict(), "eps": self.eps, "beta": self.beta}


def curvature_from_dict(d):
    """Build a profile from its JSON form (see README for the schema)."""
    kind = d.get("kind")
    if kind == "piecewise":
        return PiecewiseCurvature([(s["value"], s["from"], s["to"]) for s in d["segments"]])
    if kind == "bump":
        return BumpCurvature(d["amplitude"], d["from"], d["to"], d.get("parity", "even"))
    if kind == "smoothed":
        return smooth_curvature(curvature_from_dict(d["base"]), d["eps"], d["beta"])
    raise ValueError(f"unknown curvature kind {kind!r}")


def switchback_curvature(a, b, x):
    """``+2a`` on ``[0, x)``, ``-2a`` on ``[x, b)``: every member gives the well of depth ``a^2``."""
    return PiecewiseCurvature([(2 * a, 0.0, x), (-2 * a, x, b)])


def triple_well_curvature(a1, a2, a3, b1, b2, b3):
    """Constant-sign curvature ``2 a_i`` on ``(-b1, 0), (0, b2), (b2, b2 + b3)``."""
    return PiecewiseCurvature([(2 * a1, -b1, 0.0), (2 * a2, 0.0, b2), (2 * a3, b2, b2 + b3)])


def smooth_curvature(profile, eps, beta):
    return SmoothedCurvature(profile, eps, beta)


def total_angle(profile):
    """Total turning angle between the two straight ends."""
    return profile.total_angle()


@dataclass(frozen=True)
class Polyline:
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    angle: np.ndarray

    def write_csv(self, path, digits=12):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "x", "y", "angle"])
            for row in zip(self.t, self.x, self.y, self.angle):
                w.writerow([f"{v:.{digits}g}" for v in row])

    def moved(self, theta, dx, dy):
        """Copy under rotation by ``theta`` followed by translation."""
        c, s = math.cos(theta), math.sin(theta)
        return Polyline(self.t, c * self.x - s * self.y + dx, s * self.x + c * self.y + dy,
                        self.angle + theta)


def reconstruct_curve(profile, t_min, t_max, step):
    """Sample the arc-length parametrized curve with the given curvature.

    Each step advances by the exact chord of a circular arc whose curvature
    is the midpoint value, which is exact on constant-curvature stretches
    and second order elsewhere.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    if not t_max > t_min:
        raise ValueError("degenerate parameter range")
    a, b = profile.support
    if t_min > a or t_max < b:
        raise ValueError("parameter range must contain the curvature support")
    n = max(1, int(math.ceil((t_max - t_min) / step - 1e-9)))
    t = np.linspace(t_min, t_max, n + 1)
    h = t[1] - t[0]
    mid = t[:-1] + 0.5 * h
    phi_mid = profile.angle(mid)
    kappa = profile(mid)
    chord = h * np.sinc(kappa * h / (2 * np.pi))
    x = np.concatenate([[0.0], np.cumsum(chord * np.cos(phi_mid))])
    y = np.concatenate([[0.0], np.cumsum(chord * np.sin(phi_mid))])
    return Polyline(t, x, y, profile.angle(t))


def self_intersects(polyline):
    """``(True, (i, j))`` for the first crossing of non-adjacent segments, else ``(False, None)``."""
    if polyline.x.size < 3:
        raise ValueError("need at least two segments")
    i, j = kernels.first_crossing(polyline.x, polyline.y)
    if i < 0:
        return False, None
    return True, (i, j)


def intersection_onset(family, lo, hi, pad=3.0, step=1e-3, tol=1e-6):
    """Bisect for the parameter where ``family(p)`` starts to self-intersect.

    ``family(lo)`` and ``family(hi)`` must get different verdicts. The curves
    are drawn with straight ends of length ``pad`` on both sides.
    """
    def verdict(p):
        prof = family(p)
        a, b = prof.support
        return self_intersects(reconstruct_curve(prof, a - pad, b + pad, step))[0]

    vlo, vhi = verdict(lo), verdict(hi)
    if vlo == vhi:
        raise ValueError("no change of verdict on the bracket")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if verdict(mid) == vlo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
