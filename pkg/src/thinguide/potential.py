"""Effective 1D potentials ``V = -gamma^2/4`` and their ``u, v`` factorization."""
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from ._pp import PiecewisePolynomial
from .geometry import CurvatureProfile, HypothesisError, curvature_from_dict


class Potential1D:
    """Compactly supported potential stored as a piecewise polynomial.

    ``nonzero_mean=True`` enforces the standing assumption that the integral
    of the potential does not vanish. ``nonpositive=True`` clips rounding
    residue of the wrong sign (curvature-induced potentials are ``<= 0``).
    """

    def __init__(self, pp, source=None, nonzero_mean=True, label=None, nonpositive=False):
        self.pp = pp
        self.source = source
        self.label = label
        self.nonpositive = nonpositive
        if nonzero_mean and abs(self.integral()) <= 1e-14 * max(1.0, self.pp.sup_abs()):
            raise HypothesisError("the potential has zero integral (or vanishes identically)")

    def __call__(self, t):
        val = self.pp(t)
        return np.minimum(val, 0.0) if self.nonpositive else val

    @property
    def support(self):
        return self.pp.support

    @property
    def breakpoints(self):
        return self.pp.knots.copy()

    @property
    def width(self):
        a, b = self.support
        return b - a

    def integral(self):
        return self.pp.integral()

    def is_piecewise_constant(self):
        return self.pp.is_piecewise_constant()

    def piece_values(self):
        """Constant value on each piece; only for piecewise-constant potentials."""
        if not self.is_piecewise_constant():
            raise ValueError("potential is not piecewise constant")
        return np.array([c[0] for c in self.pp.coefs])

    def scaled(self, factor):
        return Potential1D(self.pp.map(lambda c: factor * c), nonzero_mean=False, label=self.label,
                           nonpositive=self.nonpositive and factor > 0)

    def shifted(self, offset):
        """Potential translated by ``offset`` along the line."""
        return Potential1D(PiecewisePolynomial(self.pp.knots + offset, self.pp.coefs),
                           nonzero_mean=False, label=self.label, nonpositive=self.nonpositive)

    def to_dict(self):
        if self.source is not None:
            return self.source
        if self.is_piecewise_constant():
            k = self.pp.knots
            return {"kind": "piecewise",
                    "segments": [{"value": float(v), "from": float(a), "to": float(b)}
                                 for v, a, b in zip(self.piece_values(), k[:-1], k[1:])]}
        raise ValueError("only piecewise-constant or sourced potentials are serializable")


@dataclass(frozen=True)
class UVSplit:
    """``v = |V|^{1/2}``, ``u = sgn(V) |V|^{1/2}`` so that ``u v = V``."""

    potential: Potential1D

    def v(self, t):
        return np.sqrt(np.abs(self.potential(t)))

    def u(self, t):
        val = self.potential(t)
        return np.sign(val) * np.sqrt(np.abs(val))

    @property
    def support(self):
        return self.potential.support


def uv_split(potential):
    return UVSplit(potential)


def potential_from_curvature(profile: CurvatureProfile):
    if profile.sup_abs() == 0.0:
        raise HypothesisError("zero curvature gives a vanishing potential")
    pp = profile.pp.map(lambda c: -0.25 * P.polypow(c, 2))
    return Potential1D(pp, source={"kind": "curvature", "curvature": profile.to_dict()},
                       nonpositive=True)


def piecewise_potential(segments, nonzero_mean=True):
    """Piecewise-constant potential from ``(value, start, end)`` triples (gaps are zero)."""
    segs = [(float(v), float(a), float(b)) for v, a, b in segments]
    knots, coefs = [segs[0][1]], []
    for v, a, b in segs:
        if not b > a or a < knots[-1]:
            raise ValueError("segments must be ordered, non-overlapping, of positive length")
        if a > knots[-1]:
            knots.append(a)
            coefs.append([0.0])
        knots.append(b)
        coefs.append([v])
    return Potential1D(PiecewisePolynomial(knots, coefs), nonzero_mean=nonzero_mean)


def _positive(**kw):
    for name, val in kw.items():
        if not (np.isfinite(val) and val > 0):
            raise ValueError(f"{name} must be positive, got {val}")


def single_well(a, b):
    """Square well of depth ``a^2`` on ``(0, b)``."""
    _positive(a=a, b=b)
    pot = piecewise_potential([(-a * a, 0.0, b)])
    pot.source = {"kind": "well", "a": float(a), "b": float(b)}
    return pot


def triple_well(a1, a2, a3, b1, b2, b3):
    """Depths ``a_i^2`` on ``(-b1, 0)``, ``(0, b2)``, ``(b2, b2 + b3)``."""
    _positive(a1=a1, a2=a2, a3=a3, b1=b1, b2=b2, b3=b3)
    pot = piecewise_potential([(-a1 * a1, -b1, 0.0), (-a2 * a2, 0.0, b2),
                               (-a3 * a3, b2, b2 + b3)])
    pot.source = {"kind": "triple_well", "a": [float(a1), float(a2), float(a3)],
                  "b": [float(b1), float(b2), float(b3)]}
    return pot


def triple_well_sine_residual(a1, a2, a3, b1, b2, b3):
    """Resonance condition for the triple well written with sines and cosines."""
    s1, s2, s3 = math.sin(a1 * b1), math.sin(a2 * b2), math.sin(a3 * b3)
    c1, c2, c3 = math.cos(a1 * b1), math.cos(a2 * b2), math.cos(a3 * b3)
    return (a1 * a3 * s1 * s2 * s3 - a2 * a3 * c1 * c2 * s3
            - a2 * a2 * c1 * s2 * c3 - a1 * a2 * s1 * c2 * c3)


def triple_well_tan_residual(a1, a2, a3, b1, b2, b3):
    """Same condition divided by ``cos(a1 b1) cos(a2 b2) cos(a3 b3)``."""
    t1, t2, t3 = math.tan(a1 * b1), math.tan(a2 * b2), math.tan(a3 * b3)
    return a1 * a3 * t1 * t2 * t3 - a2 * a3 * t3 - a2 * a2 * t2 - a1 * a2 * t1


def solve_triple_well_a1(a2, a3, beta1, beta2, beta3):
    """Outer depth parameter making the triple well resonant at fixed phases ``beta_i = a_i b_i``."""
    _positive(a2=a2, a3=a3, beta1=beta1, beta2=beta2, beta3=beta3)
    if beta1 + beta2 + beta3 >= math.pi / 2:
        raise HypothesisError("phases must satisfy beta1 + beta2 + beta3 < pi/2 (turning angle below pi)")
    t1, t2, t3 = math.tan(beta1), math.tan(beta2), math.tan(beta3)
    den = t1 * (a3 * t2 * t3 - a2)
    if den <= 0:
        raise HypothesisError("need a3 tan(beta2) tan(beta3) > a2 for a positive solution")
    return (a2 * a2 * t2 + a2 * a3 * t3) / den


def resonant_triple_well(a2, a3, beta1, beta2, beta3):
    a1 = solve_triple_well_a1(a2, a3, beta1, beta2, beta3)
    return triple_well(a1, a2, a3, beta1 / a1, beta2 / a2, beta3 / a3)


def potential_from_dict(d):
    kind = d.get("kind")
    if kind == "well":
        return single_well(d["a"], d["b"])
    if kind == "triple_well":
        (a1, a2, a3), (b1, b2, b3) = d["a"], d["b"]
        return triple_well(a1, a2, a3, b1, b2, b3)
    if kind == "piecewise":
        pot = piecewise_potential([(s["value"], s["from"], s["to"]) for s in d["segments"]])
        pot.source = d
        return pot
    if kind == "curvature":
        return potential_from_curvature(curvature_from_dict(d["curvature"]))
    if kind in ("bump", "smoothed"):
        return potential_from_curvature(curvature_from_dict(d))
    raise ValueError(f"unknown potential kind {kind!r}")
