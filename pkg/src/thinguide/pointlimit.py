"""Limit operators on the line: the scale-invariant point interaction and Dirichlet decoupling.

The resonant operator is the Laplacian on ``R \\ {0}`` with

    (c1 + c2) f(0+) = (c1 - c2) f(0-),   (c1 - c2) f'(0+) = (c1 + c2) f'(0-).

Only the projective class of ``(c1, c2)`` matters; everything below is
written in terms of ``sigma = c2^2/n`` and ``rho = c1 c2/n`` with
``n = c1^2 + c2^2``.
"""
import math
from dataclasses import dataclass

import numpy as np

from . import kernels


def _check_k(k):
    k = complex(k)
    if not k.imag > 0:
        raise ValueError("need Im k > 0")
    return k


def green(k, t):
    """``G_k(t) = (i/2k) e^{ik|t|}``."""
    return 1j / (2 * k) * np.exp(1j * k * np.abs(t))


def green_prime(k, t):
    """``d/dt G_k(t) = -sgn(t)/2 e^{ik|t|}``."""
    return -0.5 * np.sign(t) * np.exp(1j * k * np.abs(t))


@dataclass(frozen=True)
class PointInteraction:
    kind: str
    c1: float = 0.0
    c2: float = 0.0

    def __post_init__(self):
        if self.kind not in ("resonant", "dirichlet"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.kind == "resonant":
            if not (np.isfinite(self.c1) and np.isfinite(self.c2)):
                raise ValueError("constants must be finite")
            if self.c1 == 0 and self.c2 == 0:
                raise ValueError("c1 and c2 cannot both vanish")

    @classmethod
    def resonant(cls, c1, c2):
        return cls("resonant", float(c1), float(c2))

    @classmethod
    def dirichlet(cls):
        return cls("dirichlet")

    @property
    def is_resonant(self):
        return self.kind == "resonant"

    @property
    def sigma(self):
        return self.c2 * self.c2 / (self.c1 * self.c1 + self.c2 * self.c2)

    @property
    def rho(self):
        return self.c1 * self.c2 / (self.c1 * self.c1 + self.c2 * self.c2)

    def to_dict(self):
        if self.is_resonant:
            return {"kind": "resonant", "c1": self.c1, "c2": self.c2}
        return {"kind": "dirichlet"}

    @classmethod
    def from_dict(cls, d):
        if d.get("kind") == "resonant":
            return cls.resonant(d["c1"], d["c2"])
        if d.get("kind") == "dirichlet":
            return cls.dirichlet()
        raise ValueError(f"unknown point interaction {d!r}")


FREE = PointInteraction.resonant(1.0, 0.0)
DIRICHLET = PointInteraction.dirichlet()


def resolvent_kernel(op: PointInteraction, k, t, tp):
    """Integral kernel of ``(H - k^2)^{-1}`` at ``(t, t')``."""
    k = _check_k(k)
    t, tp = np.asarray(t, dtype=float), np.asarray(tp, dtype=float)
    out = green(k, t - tp)
    if not op.is_resonant:
        return out + 2j * k * green(k, t) * green(k, tp)
    s, r = op.sigma, op.rho
    if s == 0.0:
        return out
    gt, gtp = green(k, t), green(k, tp)
    dt, dtp = green_prime(k, t), green_prime(k, tp)
    return (out + 2j * k * s * gt * gtp - 2 / (1j * k) * s * dt * dtp
            + 2 * r * (gt * dtp + dt * gtp))


@dataclass(frozen=True)
class FreeAtOrigin:
    """``(G_k f)(0)`` and its derivative ``(G_k f)'(0)``."""

    value: complex
    slope: complex


def symmetric_grid(half_width, step):
    """Uniform grid ``step * (-n..n)`` with a node exactly at the origin."""
    n = int(round(half_width / step))
    return step * np.arange(-n, n + 1, dtype=float)


def free_resolvent_grid(k, x, f, use_numba=None):
    """``G_k f`` and ``(G_k f)'`` on a uniform grid, ``f`` piecewise linear."""
    k = _check_k(k)
    x = np.asarray(x, dtype=float)
    h = x[1] - x[0]
    if not np.allclose(np.diff(x), h, rtol=1e-9, atol=0):
        raise ValueError("grid must be uniform")
    left, right = kernels.green_sweep(f, h, k, use_numba=use_numba)
    return 1j / (2 * k) * (left + right), -0.5 * (left - right)


def _hermite(x, val, der, x0):
    """Cubic Hermite value of a C^1 function at ``x0`` from grid data."""
    h = x[1] - x[0]
    j = int(np.clip(np.floor((x0 - x[0]) / h), 0, x.size - 2))
    s = (x0 - x[j]) / h
    h00 = 2 * s**3 - 3 * s**2 + 1
    h10 = s**3 - 2 * s**2 + s
    h01 = -2 * s**3 + 3 * s**2
    h11 = s**3 - s**2
    return h00 * val[j] + h10 * h * der[j] + h01 * val[j + 1] + h11 * h * der[j + 1]


def free_at_origin(k, x, f, gf, dgf):
    """``(G_k f)(0)`` and ``(G_k f)'(0)``, by cubic Hermite interpolation if 0 is off-grid.

    The second derivative needed for the slope comes from ``-(Gf)'' - k^2 Gf = f``.
    """
    if not x[0] <= 0.0 <= x[-1]:
        raise ValueError("grid must contain the origin")
    j = np.flatnonzero(x == 0.0)
    if j.size:
        return FreeAtOrigin(complex(gf[j[0]]), complex(dgf[j[0]]))
    ddgf = -np.asarray(f) - k * k * gf
    return FreeAtOrigin(complex(_hermite(x, gf, dgf, 0.0)), complex(_hermite(x, dgf, ddgf, 0.0)))


@dataclass(frozen=True)
class SampledResolvent:
    """``g = (H - k^2)^{-1} f`` on a grid plus one-sided values at the origin.

    At a grid node sitting exactly on 0 ``g`` holds the average of the two
    one-sided limits.
    """

    x: np.ndarray
    g: np.ndarray
    dg: np.ndarray
    g0_minus: complex
    g0_plus: complex
    dg0_minus: complex
    dg0_plus: complex

    def boundary_residuals(self, op):
        """Relative residuals of the two matching conditions at the origin."""
        if not op.is_resonant:
            return abs(self.g0_plus) / max(1.0, abs(self.g0_minus)), 0.0
        a, b = op.c1 + op.c2, op.c1 - op.c2
        r1 = abs(a * self.g0_plus - b * self.g0_minus)
        r2 = abs(b * self.dg0_plus - a * self.dg0_minus)
        s1 = max(abs(a * self.g0_plus), abs(b * self.g0_minus), 1e-300)
        s2 = max(abs(b * self.dg0_plus), abs(a * self.dg0_minus), 1e-300)
        return r1 / s1, r2 / s2


def _coefficients(op, k, at0):
    """``(a0, a1)`` with ``g - G_k f = a0 G_k(t) + a1 G_k'(t)``."""
    if not op.is_resonant:
        return 2j * k * at0.value, 0.0
    s, r = op.sigma, op.rho
    return (2j * k * s * at0.value - 2 * r * at0.slope,
            2 / (1j * k) * s * at0.slope + 2 * r * at0.value)


def apply_resolvent(op: PointInteraction, k, x, f, use_numba=None):
    """Apply the limit resolvent to samples ``f`` on a uniform grid containing 0."""
    k = _check_k(k)
    x = np.asarray(x, dtype=float)
    gf, dgf = free_resolvent_grid(k, x, f, use_numba)
    at0 = free_at_origin(k, x, f, gf, dgf)
    a0, a1 = _coefficients(op, k, at0)
    e = np.exp(1j * k * np.abs(x))
    sg = np.sign(x)
    G, dG, ddG = 1j / (2 * k) * e, -0.5 * sg * e, -0.5j * k * e
    g = gf + a0 * G + a1 * dG
    dg = dgf + a0 * dG + a1 * ddG
    # one-sided limits at the origin, where G' jumps from 1/2 to -1/2
    lim = {side: (at0.value + a0 * 1j / (2 * k) - a1 * side / 2,
                  at0.slope - a0 * side / 2 - a1 * 0.5j * k) for side in (-1, 1)}
    (gm, dgm), (gp, dgp) = lim[-1], lim[1]
    zero = x == 0.0
    g[zero] = 0.5 * (gm + gp)
    dg[zero] = 0.5 * (dgm + dgp)
    return SampledResolvent(x, g, dg, gm, gp, dgm, dgp)


def propagator_kernel(op: PointInteraction, time, x, y):
    """Kernel of ``exp(-i time H)`` for the resonant operator."""
    if time == 0:
        raise ValueError("time must be nonzero")
    if not op.is_resonant:
        raise ValueError("propagator is implemented for the resonant family only")
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    s, r = op.sigma, op.rho
    sx, sy = np.sign(x), np.sign(y)
    bracket = s + r * sx + r * sy - s * sx * sy
    return free_propagator(time, x - y) - bracket * free_propagator(time, np.abs(x) + np.abs(y))


def free_propagator(time, x):
    """Kernel of ``exp(i t d^2/dx^2)``: ``(4 pi i t)^{-1/2} exp(i x^2 / 4t)``."""
    return np.exp(1j * np.asarray(x) ** 2 / (4 * time)) / np.sqrt(4j * np.pi * time)


def gaussian_packet(x, x0, p0, width):
    """Normalized ``exp(-(x-x0)^2/(4 width^2) + i p0 x)``."""
    norm = (2 * np.pi * width**2) ** -0.25
    return norm * np.exp(-((x - x0) ** 2) / (4 * width**2) + 1j * p0 * x)


def free_gaussian(x, time, x0, p0, width):
    """Exact free evolution of :func:`gaussian_packet` under ``exp(i t d^2/dx^2)``."""
    a = width**2 + 1j * time
    norm = (2 * np.pi * width**2) ** -0.25 * width / np.sqrt(a)
    xc = x - x0 - 2 * p0 * time
    return norm * np.exp(-xc**2 / (4 * a) + 1j * p0 * (x - x0) + 1j * p0 * x0 - 1j * p0**2 * time)


def exact_gaussian(op: PointInteraction, x, time, x0, p0, width):
    """Closed-form evolution of a packet supported (to rounding) on one half-line.

    For a source on ``y < 0`` (``y > 0``) the reflected kernel term is the
    free evolution evaluated at ``|x|`` (``-|x|``).
    """
    s, r = op.sigma, op.rho
    side = -1.0 if x0 < 0 else 1.0
    sx = np.sign(x)
    bracket = s + r * sx + r * side - s * sx * side
    direct = free_gaussian(x, time, x0, p0, width)
    mirrored = free_gaussian(-side * np.abs(x), time, x0, p0, width)
    return direct - bracket * mirrored


@dataclass(frozen=True)
class Snapshot:
    time: float
    psi: np.ndarray
    norm: float


def grid_norm(x, psi, jump=None):
    """L^2 norm by the rectangle rule; with ``jump = (psi(0-), psi(0+))`` the
    node at the origin is split into two half-weighted one-sided values."""
    h = x[1] - x[0]
    dens = np.abs(psi) ** 2
    zero = x == 0.0
    if jump is not None and np.any(zero):
        dens = np.where(zero, 0.5 * (abs(jump[0]) ** 2 + abs(jump[1]) ** 2), dens)
    return float(np.sqrt(h * np.sum(dens)))


def evolve(op: PointInteraction, x, psi0, times, cutoff=1e-16, use_numba=None):
    """Propagate ``psi0`` by grid quadrature of the exact kernel.

    Sources with ``|psi0| < cutoff * max|psi0|`` are dropped. The quadrature
    resolves the kernel's chirp only while ``|x - y| / (2 t) < pi / h``, so
    very short times on wide grids alias. A node at the origin stores the
    mean of the two one-sided limits.
    """
    if not op.is_resonant:
        raise ValueError("evolution is implemented for the resonant family only")
    x = np.asarray(x, dtype=float)
    h = x[1] - x[0]
    psi0 = np.asarray(psi0, dtype=complex)
    keep = np.abs(psi0) >= cutoff * np.max(np.abs(psi0))
    ys, cs = x[keep], psi0[keep] * h
    zero = x == 0.0
    tiny = np.array([-1e-300, 1e-300])
    out = []
    for t in times:
        if t == 0:
            out.append(Snapshot(0.0, psi0.copy(), grid_norm(x, psi0)))
            continue
        scale = 1 / np.sqrt(4j * np.pi * t)
        psi = kernels.propagate_sum(x, ys, cs, t, op.sigma, op.rho, use_numba=use_numba) * scale
        jump = None
        if np.any(zero):
            jump = kernels.propagate_sum(tiny, ys, cs, t, op.sigma, op.rho,
                                         use_numba=use_numba) * scale
            psi[zero] = jump.mean()
        out.append(Snapshot(float(t), psi, grid_norm(x, psi, jump)))
    return out


def transmission_probability(x, psi):
    """Grid mass on ``x > 0`` (the origin node is split evenly)."""
    h = x[1] - x[0]
    dens = np.abs(psi) ** 2
    return float(h * (np.sum(dens[x > 0]) + 0.5 * np.sum(dens[x == 0])))


def eigenfunction(op: PointInteraction, p, branch, x):
    """Generalized eigenfunctions with incoming wave from the left (``+``) or right (``-``)."""
    if not p > 0:
        raise ValueError("momentum must be positive")
    sc = scattering_matrix(op)
    x = np.asarray(x, dtype=float)
    if branch in ("+", 1, +1):
        return np.where(x < 0, np.exp(1j * p * x) + sc.R_plus * np.exp(-1j * p * x),
                        sc.T * np.exp(1j * p * x))
    if branch in ("-", -1):
        return np.where(x < 0, sc.T * np.exp(-1j * p * x),
                        np.exp(-1j * p * x) + sc.R_minus * np.exp(1j * p * x))
    raise ValueError("branch must be '+' or '-'")


@dataclass(frozen=True)
class ScatteringData:
    T: float
    R_plus: float
    R_minus: float

    def unitarity_defect(self):
        return self.T**2 + self.R_plus**2 - 1.0

    def matrix(self):
        return np.array([[self.T, self.R_minus], [self.R_plus, self.T]])


def scattering_matrix(op: PointInteraction):
    """Energy-independent transmission and reflection amplitudes.

    The Dirichlet-decoupled operator reflects totally with amplitude ``-1``
    from both sides.
    """
    if not op.is_resonant:
        return ScatteringData(0.0, -1.0, -1.0)
    n = op.c1 * op.c1 + op.c2 * op.c2
    T = (op.c1 * op.c1 - op.c2 * op.c2) / n
    R = 2 * op.c1 * op.c2 / n
    return ScatteringData(T, R, -R)


def amplitudes_from_eigenfunction(op, p, probe=1.3):
    """Read ``(T, R_plus)`` off ``psi_p^+`` at ``x = -probe, +probe``."""
    xl, xr = -abs(probe), abs(probe)
    left = eigenfunction(op, p, "+", np.array([xl]))[0]
    right = eigenfunction(op, p, "+", np.array([xr]))[0]
    R = (left - np.exp(1j * p * xl)) / np.exp(-1j * p * xl)
    T = right / np.exp(1j * p * xr)
    return complex(T), complex(R)


def wronskian(f, df, g, dg):
    return f * dg - df * g


def eigenfunction_wronskian(op, p, x=0.7):
    """Wronskian of ``psi_p^+`` and ``psi_p^-`` at ``x`` (constant on each side)."""
    x = np.array([x])
    e = lambda s: np.exp(1j * s * p * x)
    sc = scattering_matrix(op)
    if x[0] < 0:
        f, df = e(1) + sc.R_plus * e(-1), 1j * p * (e(1) - sc.R_plus * e(-1))
        g, dg = sc.T * e(-1), -1j * p * sc.T * e(-1)
    else:
        f, df = sc.T * e(1), 1j * p * sc.T * e(1)
        g, dg = e(-1) + sc.R_minus * e(1), -1j * p * (e(-1) - sc.R_minus * e(1))
    return complex(wronskian(f, df, g, dg)[0])


_GL_X, _GL_W = np.polynomial.legendre.leggauss(200)


def core_test_function(op, slope, width=1.0):
    """A function in the operator domain, supported on ``[-width, width]``.

    Returns ``(eta, eta'')`` as callables. The values and slopes at ``0+-``
    are ``eta(0-) = c1 + c2``, ``eta(0+) = c1 - c2``,
    ``eta'(0-) = (c1 - c2) slope``, ``eta'(0+) = (c1 + c2) slope``.
    """
    a, b = op.c1 + op.c2, op.c1 - op.c2
    base = np.polynomial.Polynomial([1, 0, -1]) ** 4
    lin = np.polynomial.Polynomial
    left = (a + b * slope * width * lin([0, 1])) * base
    right = (b + a * slope * width * lin([0, 1])) * base
    dleft, dright = left.deriv(2), right.deriv(2)

    def eta(x):
        u = np.asarray(x) / width
        return np.where(np.abs(u) <= 1, np.where(u < 0, left(u), right(u)), 0.0)

    def eta2(x):
        u = np.asarray(x) / width
        return np.where(np.abs(u) <= 1, np.where(u < 0, dleft(u), dright(u)), 0.0) / width**2

    return eta, eta2


def weak_residual(op, psi, energy, slopes=(0.0, 1.0, -2.5), widths=(1.0, 2.0)):
    """``max |int (-eta'' - energy eta) psi|`` over a few core functions ``eta``.

    Vanishes when ``psi`` solves ``-psi'' = energy psi`` off the origin and
    obeys the same matching conditions as the operator domain.
    """
    worst = 0.0
    for w in widths:
        xs = np.concatenate([0.5 * w * (_GL_X - 1), 0.5 * w * (_GL_X + 1)])
        ws = np.concatenate([0.5 * w * _GL_W, 0.5 * w * _GL_W])
        vals = psi(xs)
        for sl in slopes:
            eta, eta2 = core_test_function(op, sl, w)
            res = np.sum(ws * (-eta2(xs) - energy * eta(xs)) * vals)
            scale = np.sum(ws * np.abs(eta2(xs) * vals)) + 1e-300
            worst = max(worst, abs(res) / scale)
    return worst


def resonance_function(op):
    """Piecewise-constant zero-energy solution: ``c1 + c2`` left, ``c1 - c2`` right."""
    a, b = op.c1 + op.c2, op.c1 - op.c2
    return lambda x: np.where(np.asarray(x) < 0, a, b) + 0j


@dataclass(frozen=True)
class SpectrumProbe:
    k_grid: np.ndarray
    max_abs: float
    all_finite: bool
    resonance_residual: float


def spectrum_probe(op, re_range=(-2.0, 2.0), im_range=(0.1, 2.0), n=20,
                   points=((1.0, -1.0), (0.3, 0.7), (-2.0, -0.5), (0.0, 1.5))):
    """Scan the resolvent kernel over an ``n x n`` grid of ``k`` in the upper half-plane.

    This is a finite sample: it can reveal poles on the grid but never rule
    them out elsewhere.
    """
    re = np.linspace(*re_range, n)
    im = np.linspace(*im_range, n)
    K = re[None, :] + 1j * im[:, None]
    pts = np.array(points)
    vals = np.array([[resolvent_kernel(op, k, pts[:, 0], pts[:, 1]) for k in row] for row in K])
    res = weak_residual(op, resonance_function(op), 0.0) if op.is_resonant else float("nan")
    return SpectrumProbe(K, float(np.max(np.abs(vals))), bool(np.all(np.isfinite(vals))), res)
