"""Nyström discretization of the low-energy Birman-Schwinger machinery.

Functions on the support of the potential are represented by their values
at midpoint nodes; an integral operator with kernel ``K(t, t')`` becomes the
matrix ``K(t_i, t_j) w_j``. Inner products are ``(f, g) = sum w f g`` without
complex conjugation, matching the bilinear pairing used in the expansion
identities.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg
from scipy.sparse import linalg as sparse_linalg

from .oracle import sign_convention
from .potential import Potential1D, UVSplit, uv_split

MIN_NODES = 51


@dataclass(frozen=True)
class Quadrature:
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def N(self):
        return self.nodes.size

    def dot(self, f, g):
        return np.sum(self.weights * f * g)


def midpoint_quadrature(potential: Potential1D, N, min_per_piece=8):
    """Composite midpoint rule, uniform on each piece of the potential.

    Nodes are shared out in proportion to piece length, so a single piece
    gets the plain uniform rule and jumps of the potential never fall on a
    node's cell interior.
    """
    if N < MIN_NODES:
        raise ValueError(f"need at least {MIN_NODES} nodes, got {N}")
    knots = potential.pp.knots
    lengths = np.diff(knots)
    if N < min_per_piece * lengths.size:
        raise ValueError("too few nodes for the number of pieces")
    raw = lengths / lengths.sum() * N
    counts = np.maximum(min_per_piece, np.floor(raw).astype(int))
    # hand out the remaining nodes by largest remainder
    while counts.sum() < N:
        counts[np.argmax(raw - counts)] += 1
    while counts.sum() > N:
        i = np.argmax(np.where(counts > min_per_piece, counts - raw, -np.inf))
        counts[i] -= 1
    nodes, weights = [], []
    for a, L, n in zip(knots[:-1], lengths, counts):
        h = L / n
        nodes.append(a + h * (np.arange(n) + 0.5))
        weights.append(np.full(n, h))
    return Quadrature(np.concatenate(nodes), np.concatenate(weights))


def free_kernel(k, t, tp):
    """Free resolvent kernel ``(i / 2k) exp(ik |t - t'|)``."""
    k = complex(k)
    if not k.imag > 0:
        raise ValueError("need Im k > 0")
    return 1j / (2 * k) * np.exp(1j * k * np.abs(np.asarray(t) - np.asarray(tp)))


@dataclass(frozen=True)
class Discretization:
    """Nodes, weights and the sampled ``u``, ``v`` of a potential."""

    potential: Potential1D
    quad: Quadrature
    u: np.ndarray
    v: np.ndarray

    @property
    def N(self):
        return self.quad.N

    @property
    def t(self):
        return self.quad.nodes

    @property
    def w(self):
        return self.quad.weights


def discretize(potential, N):
    quad = midpoint_quadrature(potential, N)
    uv = uv_split(potential)
    return Discretization(potential, quad, uv.u(quad.nodes), uv.v(quad.nodes))


def m_kernel(n, disc: Discretization):
    """Matrix of ``m_n(t, t') = -1/2 u(t) |t - t'|^{n+1}/(n+1)! v(t')`` (nodal values, no weights)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    t = disc.t
    dist = np.abs(t[:, None] - t[None, :])
    return -0.5 * disc.u[:, None] * dist ** (n + 1) / math.factorial(n + 1) * disc.v[None, :]


def projectors(disc: Discretization):
    """Discrete ``P = u (v, .)/(v, u)`` and ``Q = 1 - P`` acting on nodal values."""
    vu = disc.quad.dot(disc.v, disc.u)
    if abs(vu) < 1e-300:
        raise ValueError("(v, u) vanishes: the potential has zero integral")
    P = np.outer(disc.u, disc.w * disc.v) / vu
    return P, np.eye(disc.N) - P


@dataclass(frozen=True)
class ResonanceReport:
    resonant: bool
    sigma_min: float
    c1: float
    c2: float
    A: float
    B: float
    N: int
    parity: str = None
    threshold: float = 0.0
    t: np.ndarray = field(default=None, repr=False)
    phi0: np.ndarray = field(default=None, repr=False)
    residual: float = 0.0

    def to_dict(self):
        return {"resonant": bool(self.resonant), "sigma_min": float(self.sigma_min),
                "c1": float(self.c1), "c2": float(self.c2), "A": float(self.A),
                "B": float(self.B), "N": int(self.N), "parity": self.parity}


def resonance_threshold(N):
    return max(1e-4, 10.0 / N**2)


def _parity(disc, phi, tol=1e-6):
    t, pot = disc.t, disc.potential
    a, b = pot.support
    mid = 0.5 * (a + b)
    if not np.allclose(t + t[::-1], 2 * mid, atol=1e-12 * (b - a)):
        return None
    probe = a + (b - a) * (np.arange(256) + 0.5) / 256
    if not np.allclose(pot(probe), pot(2 * mid - probe), atol=1e-12):
        return None
    scale = np.max(np.abs(phi))
    if np.max(np.abs(phi - phi[::-1])) < tol * scale:
        return "even"
    if np.max(np.abs(phi + phi[::-1])) < tol * scale:
        return "odd"
    return "none"


def detect_resonance(potential: Potential1D, N=1601):
    """Smallest singular value of ``1 + Q m0 Q`` and, near zero, the resonance data.

    The SVD is taken in the weighted inner product so that singular values
    approximate those of the continuous operator on L^2.
    """
    disc = discretize(potential, N)
    w = disc.w
    sw = np.sqrt(w)
    m0 = m_kernel(0, disc) * w[None, :]
    P, Q = projectors(disc)
    K = np.eye(N) + Q @ m0 @ Q
    Kw = sw[:, None] * K / sw[None, :]
    _, s, vh = linalg.svd(Kw)
    sigma = float(s[-1])
    phi = Q @ (vh[-1] / sw)
    phi /= math.sqrt(disc.quad.dot(phi, phi))
    vu = disc.quad.dot(disc.v, disc.u)
    c1 = disc.quad.dot(disc.v, m0 @ phi) / vu
    c2 = 0.5 * disc.quad.dot(disc.t * disc.v, phi)
    f1, f2 = sign_convention(c1, c2)
    if (f1, f2) != (c1, c2):
        phi = -phi
    c1, c2 = f1, f2
    Kphi = K @ phi
    residual = math.sqrt(disc.quad.dot(Kphi, Kphi))
    thr = resonance_threshold(N)
    return ResonanceReport(sigma < thr, sigma, float(c1), float(c2), float(-c1 - c2),
                           float(c2 - c1), N, _parity(disc, phi), thr, disc.t.copy(), phi,
                           residual)


def birman_schwinger(disc: Discretization, k):
    """Nodal matrix of ``1 + u G_k v``."""
    G = free_kernel(k, disc.t[:, None], disc.t[None, :])
    return np.eye(disc.N) + disc.u[:, None] * G * (disc.v * disc.w)[None, :]


def _check_k(k):
    k = complex(k)
    if not k.imag > 0:
        raise ValueError("need Im k > 0")
    return k


def _factor(disc, k):
    K = birman_schwinger(disc, k)
    if k.real == 0:
        K = K.real
    if not np.all(np.isfinite(K)):
        raise np.linalg.LinAlgError(f"non-finite kernel at k={k}")
    try:
        return K, linalg.lu_factor(K)
    except (linalg.LinAlgError, ValueError) as exc:
        raise np.linalg.LinAlgError(f"transition operator solve failed at k={k}") from exc


def identity_residual(T, K):
    """Relative residual ``||T K - 1|| / ||1||`` in the max-row-sum norm."""
    return float(np.linalg.norm(T @ K - np.eye(K.shape[0]), np.inf))


def transition_matrix(disc: Discretization, k, tol=1e-4):
    """``T(k) = (1 + u G_k v)^{-1}``; real arithmetic on the positive imaginary axis.

    Raises when the identity residual exceeds ``tol``, reporting the condition
    number. Near a resonance the residual grows like ``cond * 1e-16``.
    """
    k = _check_k(k)
    K, lu = _factor(disc, k)
    T = linalg.lu_solve(lu, np.eye(disc.N, dtype=K.dtype))
    res = identity_residual(T, K)
    if not np.isfinite(res) or res > tol:
        raise np.linalg.LinAlgError(
            f"transition operator ill-conditioned at k={k}: residual {res:.2e}, "
            f"cond {np.linalg.cond(K):.2e}")
    return T


def apply_transition(disc: Discretization, k, rhs):
    """``T(k) rhs`` for one or more nodal vectors without forming the inverse."""
    k = _check_k(k)
    _, lu = _factor(disc, k)
    return linalg.lu_solve(lu, rhs)


def transition_operator(potential, k, N=801):
    return transition_matrix(discretize(potential, N), k)


def operator_norm(disc, T):
    """L^2 operator norm of a nodal matrix."""
    sw = np.sqrt(disc.w)
    return float(np.linalg.norm(sw[:, None] * T / sw[None, :], 2))


def transition_norm_slope(potential, kappas, N=401):
    """Log-log slope of ``||T(i kappa)||`` against ``kappa``."""
    disc = discretize(potential, N)
    kappas = np.asarray(kappas, dtype=float)
    norms = np.array([operator_norm(disc, transition_matrix(disc, 1j * kap)) for kap in kappas])
    slope = np.polyfit(np.log(kappas), np.log(norms), 1)[0]
    return float(slope), norms


ELEMENT_NAMES = ("v,Tu", "tv,Tu", "v,Ttu", "tv,Ttu")


@dataclass(frozen=True)
class LaurentFit:
    """Coefficients of ``F(k) = t_{-1}/(ik) + t_0 + ik t_1`` for four pairings.

    ``coef[name]`` holds ``(t_{-1}, t_0, t_1)`` for each of the pairings
    ``(v, T u)``, ``(t v, T u)``, ``(v, T t u)``, ``(t v, T t u)`` where ``t``
    multiplies by the coordinate.
    """

    kappas: np.ndarray
    coef: dict
    rms_residual: dict
    tuning_factor: float = 1.0

    def __getitem__(self, key):
        return self.coef[key]


def discrete_resonance_factor(disc: Discretization):
    """Factor ``s`` making ``1 + s Q m0 Q`` exactly singular on the given nodes.

    Scaling the potential by ``s`` scales ``m0`` by ``s`` and leaves ``Q``
    unchanged, so ``s = -1/mu`` for the eigenvalue ``mu`` of ``Q m0 Q``
    closest to ``-1``. For a resonant potential ``s - 1`` is of the order of
    the quadrature error.
    """
    m0 = m_kernel(0, disc) * disc.w[None, :]
    _, Q = projectors(disc)
    mu = sparse_linalg.eigs(Q @ m0 @ Q, k=1, sigma=-1.0, return_eigenvectors=False)[0]
    if abs(mu.imag) > 1e-8 * abs(mu):
        raise np.linalg.LinAlgError("eigenvalue closest to -1 is not real")
    return float(-1.0 / mu.real)


def rescaled(disc: Discretization, factor):
    r = math.sqrt(factor)
    return Discretization(disc.potential, disc.quad, disc.u * r, disc.v * r)


def laurent_matrix_elements(potential, kappas, N=801, n_terms=5, tune=False):
    """Least-squares Laurent fit along ``k = i kappa``.

    With ``ik = -kappa`` one has ``kappa F = -t_{-1} + t_0 kappa - t_1 kappa^2 + ...``;
    fitting ``kappa F`` by a polynomial is the same as weighting the
    Laurent model by ``kappa^2``. Terms beyond the third absorb the
    remainder and are not reported.

    ``tune=True`` (for resonant potentials) first rescales the discrete
    potential so the discrete pole sits exactly at ``k = 0``; otherwise the
    fitted ``t_{-1}`` picks up an error of order ``kappa_0 / kappa`` from the
    slightly detuned discrete pole at ``kappa_0``.
    """
    kappas = np.asarray(kappas, dtype=float)
    if kappas.size < 5 or np.any(kappas <= 0) or np.any(kappas > 0.2):
        raise ValueError("need at least 5 samples in (0, 0.2]")
    if n_terms < 3:
        raise ValueError("need at least 3 terms")
    disc = discretize(potential, N)
    factor = 1.0
    if tune:
        factor = discrete_resonance_factor(disc)
        disc = rescaled(disc, factor)
    t, w, u, v = disc.t, disc.w, disc.u, disc.v
    samples = {name: [] for name in ELEMENT_NAMES}
    for kap in kappas:
        Tu, Ttu = apply_transition(disc, 1j * kap, np.column_stack([u, t * u])).T
        samples["v,Tu"].append(np.sum(w * v * Tu))
        samples["tv,Tu"].append(np.sum(w * t * v * Tu))
        samples["v,Ttu"].append(np.sum(w * v * Ttu))
        samples["tv,Ttu"].append(np.sum(w * t * v * Ttu))
    # fit in kappa / max(kappa) to keep the Vandermonde matrix well scaled
    scale = kappas.max()
    design = np.vander(kappas / scale, n_terms, increasing=True)
    powers = scale ** np.arange(n_terms)
    cond = np.linalg.cond(design)
    if not np.isfinite(cond) or cond > 1e12:
        raise np.linalg.LinAlgError(f"Laurent design matrix ill-conditioned ({cond:.2e})")
    coef, resid = {}, {}
    for name, vals in samples.items():
        y = kappas * np.real(np.asarray(vals))
        c, *_ = np.linalg.lstsq(design, y, rcond=None)
        resid[name] = float(np.sqrt(np.mean((design @ c - y) ** 2)))
        c = c / powers
        coef[name] = (-c[0], c[1], -c[2])
    return LaurentFit(kappas, coef, resid, factor)


def expected_laurent_values(c1, c2):
    """Predicted normalization-free combinations for a resonant potential."""
    n = c1 * c1 + c2 * c2
    return {"tv,Ttu:-1": 2 * c2 * c2 / n, "tv,Tu:0": 2 * c1 * c2 / n,
            "v,Ttu:0": 2 * c1 * c2 / n, "v,Tu:1": -2 * c2 * c2 / n, "v,Tu:-1": 0.0,
            "v,Tu:0": 0.0}
