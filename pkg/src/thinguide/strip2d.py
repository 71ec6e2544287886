"""Thin curved strip: regularized resolvent matrix elements between normal modes.

In curvilinear coordinates the scaled strip Hamiltonian is

    -d/dt a(t, s) d/dt - eps^{-2 alpha} d^2/ds^2 + eps^{-2} V_eps(t, s),
    a = (1 + eps^{alpha-1} s gamma(t/eps))^{-2},

with Dirichlet walls at ``s = +-d``. The transverse direction is expanded in
the first ``modes`` normal modes (Galerkin), so the divergent transverse
eigenvalues enter only through the exact differences ``lambda_n - lambda_m``.
The longitudinal direction uses flux-form finite differences on a uniform
grid with Dirichlet ends at ``t = +-L``. The resulting block-tridiagonal
system is real symmetric apart from the spectral parameter.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as sparse_linalg

from .geometry import CurvatureProfile, HypothesisError, SmoothedCurvature
from .pointlimit import PointInteraction, apply_resolvent, symmetric_grid
from .scaled1d import ConvergenceTable, probe_battery

MAX_UNKNOWNS = 2_000_000


def tube_factor(curvature: CurvatureProfile, eps, alpha, d):
    """``eps^(alpha-1) sup|gamma| d``; coordinates are global only when this is below 1."""
    return eps ** (alpha - 1) * curvature.sup_abs() * d


def check_hypotheses(curvature, eps, alpha, d):
    """Raise :class:`HypothesisError` if the tube condition or the exponent bound fails."""
    if not d > 0:
        raise ValueError("half-width d must be positive")
    tf = tube_factor(curvature, eps, alpha, d)
    if not tf < 1:
        raise HypothesisError(f"tube condition violated: eps^(alpha-1) sup|gamma| d = {tf:.4g} >= 1")
    if isinstance(curvature, SmoothedCurvature):
        beta = curvature.beta
        if not (beta > 3 and alpha > 2.5 + 1.5 * beta):
            raise HypothesisError(f"smoothed curvature needs beta > 3 and alpha > 5/2 + 3 beta/2 "
                                  f"(beta={beta}, alpha={alpha})")
    elif not alpha > 2.5:
        raise HypothesisError(f"exponent bound violated: alpha = {alpha} must exceed 5/2")


def strip_potential(curvature: CurvatureProfile, eps, alpha, d, t, s):
    """Curvature-induced potential ``V_eps(t, s)`` (before the ``eps^-2`` prefactor)."""
    t, s = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(s, dtype=float))
    x = t / eps
    g, g1, g2 = curvature(x), curvature.derivative(x, 1), curvature.derivative(x, 2)
    q = eps ** (alpha - 1) * s
    den = 1 + q * g
    if np.any(den <= 0):
        raise HypothesisError("tube condition violated: 1 + eps^(alpha-1) s gamma <= 0")
    return -g * g / (4 * den**2) + q * g2 / (2 * den**3) - 1.25 * (q * g1) ** 2 / den**4


@dataclass(frozen=True)
class NormalMode:
    index: int
    eigenvalue: float
    d: float

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        arg = self.index * math.pi * s / (2 * self.d)
        if self.index % 2:
            return np.cos(arg) / math.sqrt(self.d)
        return np.sin(arg) / math.sqrt(self.d)


def mode_eigenvalue(n, eps, alpha, d):
    return (n * math.pi / (2 * eps**alpha * d)) ** 2


def normal_modes(eps, alpha, d, n_max):
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    return [NormalMode(n, mode_eigenvalue(n, eps, alpha, d), d) for n in range(1, n_max + 1)]


def mode_gram(modes, s, weights):
    """``[sum_q w_q phi_n(s_q) phi_m(s_q)]`` for checking discrete orthonormality."""
    phi = np.array([m(s) for m in modes])
    return (phi * weights) @ phi.T


@dataclass(frozen=True)
class GridPolicy:
    """Resolution rules: ``t`` step ``eps / t_per_eps``, Gauss-Legendre ``s_points``, ``modes`` modes."""

    t_per_eps: float = 40.0
    s_points: int = 41
    modes: int = 4

    def refined(self):
        return GridPolicy(2 * self.t_per_eps, 2 * self.s_points - 1, self.modes + 2)

    def to_dict(self):
        return {"t_per_eps": self.t_per_eps, "s_points": self.s_points, "modes": self.modes}


@dataclass(frozen=True)
class LPolicy:
    """Truncation ``L = extent + log(1/decay) / Im k`` with ``extent`` the probe/curvature reach."""

    decay: float = 1e-8
    factor: float = 1.0

    def length(self, extent, k):
        return self.factor * (extent + math.log(1 / self.decay) / complex(k).imag)

    def to_dict(self):
        return {"decay": self.decay, "factor": self.factor}


@dataclass
class StripOperator:
    curvature: CurvatureProfile
    eps: float
    alpha: float
    d: float
    L: float
    t: np.ndarray = field(repr=False)
    modes: list = field(repr=False)
    s_nodes: np.ndarray = field(repr=False)
    s_weights: np.ndarray = field(repr=False)
    stiffness: sparse.csr_matrix = field(repr=False)

    @property
    def shape(self):
        """``(N_t, N_s)``: interior longitudinal nodes by transverse quadrature nodes."""
        return self.t.size - 2, self.s_nodes.size

    @property
    def n_modes(self):
        return len(self.modes)

    @property
    def interior(self):
        return self.t[1:-1]

    def eigenvalues(self):
        return np.array([m.eigenvalue for m in self.modes])

    def transverse_block(self):
        """Transverse part of the operator in the mode basis (diagonal by construction)."""
        return np.diag(self.eigenvalues())

    def system(self, k, m):
        """Sparse matrix of ``H - k^2 - lambda_m`` with ``lambda_n - lambda_m`` formed exactly."""
        lam = self.eigenvalues()
        shift = np.tile(lam - lam[m - 1], self.t.size - 2)
        return (self.stiffness + sparse.diags(shift - complex(k) ** 2)).tocsc()


def assemble(curvature: CurvatureProfile, eps, alpha, d, L, policy=GridPolicy()):
    """Assemble the longitudinal stiffness (flux form) and mode-coupling blocks."""
    check_hypotheses(curvature, eps, alpha, d)
    lo, hi = curvature.support
    if L <= eps * max(abs(lo), abs(hi)):
        raise ValueError("truncation L must exceed the scaled curvature support")
    h = eps / policy.t_per_eps
    t = symmetric_grid(L, h)
    n_int, M = t.size - 2, policy.modes
    if n_int * M > MAX_UNKNOWNS:
        raise MemoryError(f"{n_int * M} unknowns exceeds the {MAX_UNKNOWNS} guardrail")
    modes = normal_modes(eps, alpha, d, M)
    sq, sw = np.polynomial.legendre.leggauss(policy.s_points)
    sq, sw = d * sq, d * sw
    phi = np.array([m(sq) for m in modes])
    q = eps ** (alpha - 1)

    def project(values):
        # values: (n_points, n_s) -> (n_points, M, M), symmetrized so rounding cannot break symmetry
        out = np.einsum("nq,pq,mq->pnm", phi * sw, values, phi, optimize=True)
        return 0.5 * (out + out.transpose(0, 2, 1))

    tm = 0.5 * (t[1:] + t[:-1])
    inside = (tm > eps * lo) & (tm < eps * hi)
    amid = np.broadcast_to(np.eye(M), (tm.size, M, M)).copy()
    if np.any(inside):
        den = 1 + q * np.outer(curvature(tm[inside] / eps), sq)
        if np.any(den <= 0):
            raise HypothesisError("tube condition violated on the grid")
        amid[inside] = project(den**-2)
    ti = t[1:-1]
    pot = np.zeros((ti.size, M, M))
    inside = (ti > eps * lo) & (ti < eps * hi)
    if np.any(inside):
        tt, ss = np.meshgrid(ti[inside], sq, indexing="ij")
        pot[inside] = project(strip_potential(curvature, eps, alpha, d, tt, ss)) / eps**2
    diag_blocks = (amid[:-1] + amid[1:]) / h**2 + pot
    off_blocks = -amid[1:-1] / h**2
    stiffness = block_tridiagonal(diag_blocks, off_blocks)
    return StripOperator(curvature, eps, alpha, d, float(t[-1]), t, modes, sq, sw, stiffness)


def block_tridiagonal(diag_blocks, off_blocks):
    """Symmetric block-tridiagonal CSR matrix; ``off_blocks[i]`` couples block ``i`` to ``i + 1``."""
    n, M, _ = diag_blocks.shape
    a, b = np.meshgrid(np.arange(M), np.arange(M), indexing="ij")
    i = np.arange(n)[:, None, None]
    j = np.arange(n - 1)[:, None, None]
    rows = [(i * M + a).ravel(), (j * M + a).ravel(), ((j + 1) * M + b).ravel()]
    cols = [(i * M + b).ravel(), ((j + 1) * M + b).ravel(), (j * M + a).ravel()]
    vals = [diag_blocks.ravel(), off_blocks.ravel(), off_blocks.ravel()]
    return sparse.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                             shape=(n * M, n * M))


def asymmetry(opr: StripOperator):
    """``max |A - A^T|`` of the assembled real operator."""
    diff = opr.stiffness - opr.stiffness.T
    return float(abs(diff).max()) if diff.nnz else 0.0


def _check_shift(opr, k, m):
    k2 = complex(k) ** 2
    if m < 1 or m > opr.n_modes:
        raise ValueError(f"mode index {m} outside 1..{opr.n_modes}")
    # open lower channels put real k^2 inside the continuous spectrum
    threshold = opr.modes[0].eigenvalue - opr.modes[m - 1].eigenvalue
    if k2.imag == 0 and k2.real >= threshold:
        raise ValueError(f"k^2 = {k2.real:g} is real and above the channel threshold {threshold:g}; "
                         "the shifted system is not invertible")


@dataclass
class ModeSolve:
    """Factorized ``H - k^2 - lambda_m`` for repeated right-hand sides."""

    opr: StripOperator
    k: complex
    m: int
    lu: object = field(repr=False)

    def apply(self, f, n=None):
        """``R_{n,m} f`` on the interior grid; all modes if ``n`` is None."""
        opr = self.opr
        M = opr.n_modes
        rhs = np.zeros((opr.t.size - 2, M), dtype=complex)
        rhs[:, self.m - 1] = np.asarray(f)[1:-1]
        sol = self.lu.solve(rhs.ravel()).reshape(-1, M)
        full = np.zeros((opr.t.size, M), dtype=complex)
        full[1:-1] = sol
        return full if n is None else full[:, n - 1]


def factorize(opr: StripOperator, k, m=1):
    _check_shift(opr, k, m)
    A = opr.system(k, m)
    return ModeSolve(opr, complex(k), m, sparse_linalg.splu(A))


def resolvent_matrix_element(opr: StripOperator, n, m, k, f):
    """``R_{n,m}(k^2) f`` sampled on ``opr.t``: mode ``n`` component of the solve forced in mode ``m``."""
    return factorize(opr, k, m).apply(f, n)


def condition_estimate(opr: StripOperator, k, m=1):
    """1-norm condition number estimate of the shifted system."""
    A = opr.system(k, m)
    lu = sparse_linalg.splu(A)
    inv = sparse_linalg.LinearOperator(A.shape, matvec=lu.solve,
                                       rmatvec=lambda y: lu.solve(y, trans="H"), dtype=complex)
    # onenormest overflows harmlessly in an internal ratio of its random probes
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        return float(sparse_linalg.onenormest(A) * sparse_linalg.onenormest(inv))


def _relative_l2(a, b, ref):
    return float(np.sqrt(np.sum(np.abs(a - b) ** 2) / np.sum(np.abs(ref) ** 2)))


def _probe_extent(t, probes):
    reach = 0.0
    for f in probes:
        nz = np.flatnonzero(np.abs(f) > 0)
        if nz.size:
            reach = max(reach, abs(t[nz[0]]), abs(t[nz[-1]]))
    return reach


@dataclass
class StripPoint:
    """Per-eps diagnostics: diagonal/off-diagonal probe errors plus control errors."""

    eps: float
    diagonal: float
    off_diagonal: float
    controls: list
    outputs: list = field(repr=False, default_factory=list)
    unknowns: int = 0
    L: float = 0.0


def strip_point(curvature, eps, alpha, d, k, limit, controls=(), policy=GridPolicy(),
                L_policy=LPolicy(), probe_fn=probe_battery):
    """Diagonal ``R_{1,1}`` error vs ``limit`` and off-diagonal ``R_{2,1}`` norm at one eps."""
    lo, hi = curvature.support
    h = eps / policy.t_per_eps
    # probe reach is read off a coarse sampling; probes are fixed functions of t
    coarse = symmetric_grid(40.0, 1e-2)
    extent = max(_probe_extent(coarse, probe_fn(coarse)), eps * max(abs(lo), abs(hi)))
    L = L_policy.length(extent, k)
    opr = assemble(curvature, eps, alpha, d, L, policy)
    t = opr.t
    probes = probe_fn(t)
    solver = factorize(opr, k, 1)
    diag, off, ctrl, outs = 0.0, 0.0, np.zeros(len(controls)), []
    for f in probes:
        full = solver.apply(f)
        outs.append(full[:, 0])
        diag = max(diag, _relative_l2(full[:, 0], apply_resolvent(limit, k, t, f).g, f))
        if opr.n_modes > 1:
            off = max(off, _relative_l2(full[:, 1], 0.0, f))
        for i, op in enumerate(controls):
            ctrl[i] = max(ctrl[i], _relative_l2(full[:, 0], apply_resolvent(op, k, t, f).g, f))
    return StripPoint(eps, diag, off, ctrl.tolist(), outs, opr.stiffness.shape[0], opr.L)


@dataclass
class Strip2DStudy:
    diagonal: ConvergenceTable
    off_diagonal: ConvergenceTable
    refinement_change: float
    min_step_change: float
    truncation_change: float
    wall_times: list

    @property
    def refinement_ok(self):
        return self.refinement_change < self.min_step_change

    @property
    def off_diagonal_drop(self):
        e = self.off_diagonal.errors
        return float(e[0] / e[-1]) if e[-1] > 0 else math.inf

    def summary(self):
        return {"diagonal": self.diagonal.summary(), "off_diagonal": self.off_diagonal.summary(),
                "off_diagonal_drop": self.off_diagonal_drop,
                "refinement_change": self.refinement_change, "min_step_change": self.min_step_change,
                "refinement_ok": self.refinement_ok, "truncation_change": self.truncation_change,
                "wall_times": self.wall_times}


def _output_change(a: StripPoint, b: StripPoint, stride):
    """Probe-max relative change between a run and one on a grid refined by ``stride``."""
    worst = 0.0
    for ga, gb in zip(a.outputs, b.outputs):
        n = (gb.size - 1) // 2
        m = (ga.size - 1) // 2
        # align on the common interval around the origin
        r = min(m, n // stride)
        sa = ga[m - r:m + r + 1]
        sb = gb[n - stride * r:n + stride * r + 1:stride]
        worst = max(worst, float(np.linalg.norm(sa - sb) / np.linalg.norm(sa)))
    return worst


def convergence_study_2d(curvature, limit: PointInteraction, alpha=3.0, d=1.0, k=1j,
                         eps_list=(0.4, 0.3, 0.2, 0.15), controls=(), policy=GridPolicy(),
                         L_policy=LPolicy(), workers=1, progress=None, refine=True):
    """Diagonal and off-diagonal tables over ``eps_list`` with refinement and truncation checks.

    The refinement run repeats the smallest eps on :meth:`GridPolicy.refined`;
    the truncation run repeats it with ``L`` enlarged by 1.5.
    """
    import time

    eps_list = [float(e) for e in eps_list]
    for e in eps_list:
        check_hypotheses(curvature, e, alpha, d)

    def one(eps):
        t0 = time.perf_counter()
        pt = strip_point(curvature, eps, alpha, d, k, limit, controls, policy, L_policy)
        dt = time.perf_counter() - t0
        if progress:
            progress(f"eps={eps:g} diag={pt.diagonal:.4e} off={pt.off_diagonal:.4e} "
                     f"unknowns={pt.unknowns} time={dt:.2f}s")
        return pt, dt

    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(one, eps_list))
    else:
        results = [one(e) for e in eps_list]
    points = [p for p, _ in results]
    times = [dt for _, dt in results]
    extra = {}
    if controls:
        extra["controls"] = {f"{op.kind}:{op.c1:g}:{op.c2:g}": [p.controls[i] for p in points]
                             for i, op in enumerate(controls)}
    diag = ConvergenceTable(eps_list, [p.diagonal for p in points], limit.kind, extra=extra)
    off = ConvergenceTable(eps_list, [p.off_diagonal for p in points], "zero")
    steps = np.abs(np.diff(diag.errors))
    min_step = float(steps.min()) if steps.size else math.inf
    ref = trunc = math.nan
    if refine:
        last = points[-1]
        fine = strip_point(curvature, eps_list[-1], alpha, d, k, limit, (), policy.refined(), L_policy)
        ref = _output_change(last, fine, 2)
        longer = strip_point(curvature, eps_list[-1], alpha, d, k, limit, (), policy,
                             LPolicy(L_policy.decay, 1.5 * L_policy.factor))
        trunc = _output_change(last, longer, 1)
    return Strip2DStudy(diag, off, ref, min_step, trunc, times)


def default_curvature(half_width=2.0, steps=4000):
    """S-shaped C^2 bump on ``[-half_width, half_width]`` tuned to its first zero-energy resonance."""
    from .geometry import BumpCurvature
    from .oracle import tune_to_resonance
    from .potential import potential_from_curvature

    family = lambda amp: potential_from_curvature(BumpCurvature(amp, -half_width, half_width, "odd"))
    # the first resonance of the unit-support shape sits near amplitude 5.51
    guess = 5.512877574797229 / half_width
    amp = tune_to_resonance(family, (0.8 * guess, 1.2 * guess), steps)
    return BumpCurvature(amp, -half_width, half_width, "odd")
