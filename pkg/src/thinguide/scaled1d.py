"""Resolvent of the scaled 1D operator ``-d^2/dt^2 + eps^-2 V(t/eps)`` and its limit.

The inverse is assembled from the free resolvent and the Birman-Schwinger
transition operator of the unscaled potential at ``eps k``:

    (H_eps - k^2)^{-1} = G_k - eps^{-1} A_eps T(eps k) C_eps,
    A_eps(t, tau) = G_k(t - eps tau) v(tau),   C_eps(tau, t) = u(tau) G_k(eps tau - t).

Only the support of ``V`` is discretized (Nyström nodes); functions of ``t``
live on a uniform grid containing the origin.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as sparse_linalg

from . import kernels
from .lowenergy import apply_transition, discretize
from .pointlimit import (DIRICHLET, PointInteraction, apply_resolvent, free_resolvent_grid,
                         symmetric_grid)
from .potential import Potential1D


def probe_battery(x):
    """Five compactly supported ``(1 - ((t - c)/w)^2)^4`` bumps at assorted centers and widths."""
    specs = [(-3.0, 1.5), (-0.6, 0.5), (0.4, 0.6), (2.0, 1.0), (5.0, 2.5)]
    out = []
    for c, w in specs:
        s = (x - c) / w
        out.append(np.where(np.abs(s) < 1, (1 - s * s) ** 4, 0.0))
    return out


def default_grid(half_width=10.0, step=1e-3):
    return symmetric_grid(half_width, step)


def _free_at(x, gf, dgf, points):
    """``(G_k f)`` at arbitrary points inside the grid by cubic Hermite interpolation."""
    h = x[1] - x[0]
    j = np.clip(np.floor((points - x[0]) / h).astype(int), 0, x.size - 2)
    s = (points - x[j]) / h
    h00 = 2 * s**3 - 3 * s**2 + 1
    h10 = s**3 - 2 * s**2 + s
    h01 = -2 * s**3 + 3 * s**2
    h11 = s**3 - s**2
    return h00 * gf[j] + h10 * h * dgf[j] + h01 * gf[j + 1] + h11 * h * dgf[j + 1]


def _interaction(disc, eps, k, x, y):
    """``sum_tau w G_k(x - eps tau) v(tau) y(tau)`` on the grid ``x``."""
    tau, w, v = disc.t, disc.w, disc.v
    c = w * v * y
    lo, hi = eps * tau[0], eps * tau[-1]
    out = np.empty(x.size, dtype=complex)
    right, left = x > hi, x < lo
    mid = ~(right | left)
    # outside the scaled support the kernel factorizes
    out[right] = np.exp(1j * k * x[right]) * np.sum(c * np.exp(-1j * k * eps * tau))
    out[left] = np.exp(-1j * k * x[left]) * np.sum(c * np.exp(1j * k * eps * tau))
    if np.any(mid):
        out[mid] = kernels.exp_sum(x[mid], eps * tau, c, k)
    return 1j / (2 * k) * out


def scaled_resolvent_apply(potential: Potential1D, eps, k, x, f, N=801, disc=None):
    """Samples of ``(H_eps - k^2)^{-1} f`` on the uniform grid ``x``."""
    k = complex(k)
    if not k.imag > 0:
        raise ValueError("need Im k > 0")
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    disc = disc or discretize(potential, N)
    gf, dgf = free_resolvent_grid(k, x, f)
    a, b = potential.support
    if eps * a < x[0] or eps * b > x[-1]:
        raise ValueError("grid must cover the scaled support")
    cf = disc.u * _free_at(x, gf, dgf, eps * disc.t)
    y = apply_transition(disc, eps * k, cf)
    return gf - _interaction(disc, eps, k, x, y) / eps


def unscaled_resolvent_apply(potential, k, x, f, N=801):
    """``(G_k - G_k v T(k) u G_k) f``, the unscaled resolvent written out directly."""
    k = complex(k)
    disc = discretize(potential, N)
    gf, dgf = free_resolvent_grid(k, x, f)
    ugf = disc.u * _free_at(x, gf, dgf, disc.t)
    y = apply_transition(disc, k, ugf)
    kern = 1j / (2 * k) * kernels.exp_sum(x, disc.t, disc.w * disc.v * y, k)
    return gf - kern


def dilated_resolvent_apply(potential, eps, k, x, f, N=801):
    """Same as :func:`scaled_resolvent_apply` via the dilation ``eps^2 U R(eps^2 k^2) U*``.

    On the stretched grid ``x / eps`` the co-dilated samples of ``f`` are the
    original array, so only the grid and the wavenumber change.
    """
    return eps**2 * unscaled_resolvent_apply(potential, eps * k, np.asarray(x) / eps, f, N)


def finite_difference_apply(potential, eps, k, x, f, pad=10.0):
    """Second-order FD solve of ``(-d^2 + eps^-2 V(t/eps) - k^2) g = f`` with Dirichlet ends.

    The potential is cell-averaged exactly (piecewise-polynomial antiderivative)
    so jumps do not degrade the order. The domain is padded by ``pad`` on
    both sides so the truncation is invisible at ``Im k = 1``.
    """
    k = complex(k)
    h = x[1] - x[0]
    npad = int(round(pad / h))
    xx = x[0] + h * np.arange(-npad, x.size + npad)
    ff = np.concatenate([np.zeros(npad), f, np.zeros(npad)])
    anti = potential.pp.antiderivative
    edges = np.concatenate([xx - 0.5 * h, [xx[-1] + 0.5 * h]])
    # int over a cell of eps^-2 V(t/eps) dt = eps^-1 [W(t/eps)] with W the antiderivative of V
    cell = np.diff(anti(edges / eps)) / (eps * h)
    n = xx.size
    main = 2 / h**2 + cell - k * k
    off = np.full(n - 1, -1 / h**2)
    A = sparse.diags([off, main, off], [-1, 0, 1], format="csc", dtype=complex)
    g = sparse_linalg.spsolve(A, ff.astype(complex))
    return g[npad:npad + x.size]


@dataclass
class ConvergenceTable:
    eps: np.ndarray
    errors: np.ndarray
    limit_kind: str
    slope: float = float("nan")
    intercept: float = float("nan")
    monotone: bool = False
    fit_residual: float = float("nan")
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.eps = np.asarray(self.eps, dtype=float)
        self.errors = np.asarray(self.errors, dtype=float)
        if np.any(np.diff(self.eps) >= 0):
            raise ValueError("eps values must be strictly decreasing")
        self.monotone = bool(np.all(np.diff(self.errors) < 0))
        ok = np.all(np.isfinite(self.errors)) and np.all(self.errors > 0)
        if ok and self.eps.size >= 2:
            le, lr = np.log(self.eps), np.log(self.errors)
            self.slope, self.intercept = map(float, np.polyfit(le, lr, 1))
            self.fit_residual = float(np.sqrt(np.mean((self.slope * le + self.intercept - lr) ** 2)))

    @property
    def fit_ok(self):
        return self.monotone and np.isfinite(self.slope)

    def rows(self):
        return [(float(e), float(r)) for e, r in zip(self.eps, self.errors)]

    def summary(self):
        return {"slope": self.slope, "intercept": self.intercept, "limit_kind": self.limit_kind,
                "monotone": self.monotone, "fit_residual": self.fit_residual, **self.extra}


def _relative_l2(a, b, ref):
    return float(np.sqrt(np.sum(np.abs(a - b) ** 2) / np.sum(np.abs(ref) ** 2)))


def convergence_study_1d(potential, limit: PointInteraction, k=1j, eps_list=(0.4, 0.2, 0.1, 0.05),
                         x=None, probes=None, N=801, workers=1, controls=()):
    """Probe-max relative errors of the scaled resolvent against ``limit``.

    ``controls`` lists further point interactions (e.g. the wrong limit) whose
    errors are recorded in ``extra['controls']`` for falsification checks.
    """
    eps_list = [float(e) for e in eps_list]
    if any(not 0 < e <= 0.5 for e in eps_list):
        raise ValueError("eps values must lie in (0, 0.5]")
    x = default_grid() if x is None else np.asarray(x, dtype=float)
    probes = probe_battery(x) if probes is None else probes
    disc = discretize(potential, N)
    targets = [limit, *controls]
    lims = [[apply_resolvent(op, k, x, f).g for f in probes] for op in targets]

    def one(eps):
        errs = np.zeros(len(targets))
        for j, f in enumerate(probes):
            g = scaled_resolvent_apply(potential, eps, k, x, f, disc=disc)
            for i in range(len(targets)):
                errs[i] = max(errs[i], _relative_l2(g, lims[i][j], f))
        return errs

    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(one, eps_list))
    else:
        rows = [one(e) for e in eps_list]
    rows = np.array(rows)
    extra = {}
    if controls:
        extra["controls"] = {f"{op.kind}:{op.c1:g}:{op.c2:g}": rows[:, i + 1].tolist()
                             for i, op in enumerate(controls)}
    return ConvergenceTable(eps_list, rows[:, 0], limit.kind, extra=extra)


def limit_for(potential, N=1601):
    """Limit operator predicted by the resonance analysis of ``potential``."""
    from .lowenergy import detect_resonance

    rep = detect_resonance(potential, N)
    if rep.resonant:
        return PointInteraction.resonant(rep.c1, rep.c2), rep
    return DIRICHLET, rep
