"""Compactly supported piecewise polynomials.

Curvature profiles and potentials are both stored this way, which keeps
integrals, derivatives and squares exact.
"""
import numpy as np
from numpy.polynomial import polynomial as P


class PiecewisePolynomial:
    """Function equal to ``polys[i](t - knots[i])`` on ``[knots[i], knots[i+1])``, zero elsewhere."""

    def __init__(self, knots, coefs):
        knots = np.asarray(knots, dtype=float)
        if knots.ndim != 1 or knots.size < 2:
            raise ValueError("need at least two knots")
        if np.any(np.diff(knots) <= 0):
            raise ValueError("knots must be strictly increasing")
        if len(coefs) != knots.size - 1:
            raise ValueError("one coefficient array per interval")
        self.knots = knots
        self.coefs = [np.trim_zeros(np.atleast_1d(np.asarray(c, dtype=float)), "b")
                      if np.any(c) else np.zeros(1) for c in coefs]

    @property
    def support(self):
        return float(self.knots[0]), float(self.knots[-1])

    @property
    def degree(self):
        return max(len(c) - 1 for c in self.coefs)

    def _locate(self, t):
        idx = np.searchsorted(self.knots, t, side="right") - 1
        inside = (idx >= 0) & (idx < len(self.coefs))
        return idx, inside

    def __call__(self, t, nu=0):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        idx, inside = self._locate(t)
        for i, c in enumerate(self.coefs):
            m = inside & (idx == i)
            if np.any(m):
                cc = P.polyder(c, nu) if nu else c
                out[m] = P.polyval(t[m] - self.knots[i], cc)
        return out if out.ndim else float(out)

    def _piece_integrals(self):
        return np.array([P.polyval(b - a, P.polyint(c))
                         for c, a, b in zip(self.coefs, self.knots[:-1], self.knots[1:])])

    def integral(self):
        return float(self._piece_integrals().sum())

    def antiderivative(self, t):
        """``int_{-inf}^t`` of the function."""
        t = np.asarray(t, dtype=float)
        cum = np.concatenate([[0.0], np.cumsum(self._piece_integrals())])
        out = np.where(t >= self.knots[-1], cum[-1], 0.0)
        idx, inside = self._locate(t)
        for i, c in enumerate(self.coefs):
            m = inside & (idx == i)
            if np.any(m):
                out[m] = cum[i] + P.polyval(t[m] - self.knots[i], P.polyint(c))
        return out if out.ndim else float(out)

    def map(self, fn):
        """Apply ``fn`` to every piece's coefficient array (e.g. squaring)."""
        return PiecewisePolynomial(self.knots, [fn(c) for c in self.coefs])

    def is_piecewise_constant(self):
        return self.degree == 0

    def sup_abs(self, samples=64):
        """Max of ``|f|`` over the support (sampled for non-constant pieces)."""
        best = 0.0
        for c, a, b in zip(self.coefs, self.knots[:-1], self.knots[1:]):
            if len(c) == 1:
                best = max(best, abs(c[0]))
                continue
            crit = [r.real for r in P.polyroots(P.polyder(c)) if abs(r.imag) < 1e-12] if len(c) > 2 else []
            pts = np.concatenate([np.linspace(0, b - a, samples),
                                  [r for r in crit if 0 <= r <= b - a]])
            best = max(best, float(np.max(np.abs(P.polyval(pts, c)))))
        return best
