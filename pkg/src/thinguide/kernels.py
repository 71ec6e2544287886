"""Hot inner loops.

Every kernel exists twice: a numba-compiled loop (``*_nb``) and a numpy
version (``*_np``). The public name picks one according to
:data:`thinguide._accel.USE_NUMBA`; both are importable for benchmarking and
cross-checks.
"""
import numpy as np
from scipy.signal import lfilter

from ._accel import USE_NUMBA, njit

# ---------------------------------------------------------------------------
# exponential Green's function on a uniform grid


def panel_weights(z):
    """Weights of the near and far panel ends for ``int e^{z u} f`` with f linear.

    Returns ``(far, near)`` with ``far = int_0^1 e^{z u} u du`` and
    ``near = int_0^1 e^{z u} (1 - u) du``.
    """
    z = complex(z)
    if abs(z) < 0.1:
        far = 0j
        near = 0j
        term = 1 + 0j
        for n in range(25):
            far += term / (n + 2)
            near += term / ((n + 1) * (n + 2))
            term *= z / (n + 1)
        return far, near
    ez = np.exp(z)
    far = (ez * (z - 1) + 1) / z**2
    near = (ez - 1) / z - far
    return far, near


@njit
def _sweep_nb(f, decay, wfar, wnear):
    n = f.shape[0]
    left = np.zeros(n, dtype=np.complex128)
    right = np.zeros(n, dtype=np.complex128)
    for j in range(1, n):
        left[j] = decay * left[j - 1] + wfar * f[j - 1] + wnear * f[j]
    for j in range(n - 2, -1, -1):
        right[j] = decay * right[j + 1] + wfar * f[j + 1] + wnear * f[j]
    return left, right


def _sweep_np(f, decay, wfar, wnear):
    f = np.asarray(f, dtype=np.complex128)
    p = np.zeros_like(f)
    p[1:] = wfar * f[:-1] + wnear * f[1:]
    left = lfilter([1.0], [1.0, -decay], p)
    q = np.zeros_like(f)
    q[:-1] = wfar * f[1:] + wnear * f[:-1]
    right = lfilter([1.0], [1.0, -decay], q[::-1])[::-1]
    return left, right


def green_sweep(f, h, k, use_numba=None):
    """Left/right exponential partial integrals of grid samples ``f``.

    ``left[j] = int_{t_0}^{t_j} e^{ik(t_j - s)} f(s) ds`` and
    ``right[j] = int_{t_j}^{t_end} e^{ik(s - t_j)} f(s) ds`` with ``f``
    linearly interpolated between nodes; the exponential factor is
    integrated exactly on every panel.
    """
    z = 1j * k * h
    wfar, wnear = panel_weights(z)
    decay = np.exp(z)
    f = np.ascontiguousarray(f, dtype=np.complex128)
    use = USE_NUMBA if use_numba is None else use_numba
    if use:
        return _sweep_nb(f, decay, wfar * h, wnear * h)
    return _sweep_np(f, decay, wfar * h, wnear * h)


# ---------------------------------------------------------------------------
# dense exponential sum  out_i = sum_j e^{ik|x_i - s_j|} c_j


@njit
def _expsum_nb(x, s, c, k):
    out = np.zeros(x.shape[0], dtype=np.complex128)
    for i in range(x.shape[0]):
        acc = 0j
        xi = x[i]
        for j in range(s.shape[0]):
            acc += np.exp(1j * k * abs(xi - s[j])) * c[j]
        out[i] = acc
    return out


def _expsum_np(x, s, c, k, chunk=2048):
    out = np.empty(x.shape[0], dtype=np.complex128)
    for lo in range(0, x.shape[0], chunk):
        d = np.abs(x[lo:lo + chunk, None] - s[None, :])
        out[lo:lo + chunk] = np.exp(1j * k * d) @ c
    return out


def exp_sum(x, s, c, k, use_numba=None):
    x = np.ascontiguousarray(x, dtype=np.float64)
    s = np.ascontiguousarray(s, dtype=np.float64)
    c = np.ascontiguousarray(c, dtype=np.complex128)
    use = USE_NUMBA if use_numba is None else use_numba
    if use:
        return _expsum_nb(x, s, c, complex(k))
    return _expsum_np(x, s, c, complex(k))


# ---------------------------------------------------------------------------
# point-interaction propagator applied by grid quadrature


@njit
def _propagate_nb(x, y, c, t, sig, rho):
    out = np.zeros(x.shape[0], dtype=np.complex128)
    q = 1.0 / (4.0 * t)
    for i in range(x.shape[0]):
        xi = x[i]
        sx = np.sign(xi)
        acc = 0j
        for j in range(y.shape[0]):
            yj = y[j]
            sy = np.sign(yj)
            d = xi - yj
            ph = q * d * d
            val = complex(np.cos(ph), np.sin(ph))
            b = sig + rho * sx + rho * sy - sig * sx * sy
            if b != 0.0:
                e = abs(xi) + abs(yj)
                ph2 = q * e * e
                val -= b * complex(np.cos(ph2), np.sin(ph2))
            acc += val * c[j]
        out[i] = acc
    return out


def _propagate_np(x, y, c, t, sig, rho, chunk=1024):
    out = np.empty(x.shape[0], dtype=np.complex128)
    q = 1.0 / (4.0 * t)
    sy = np.sign(y)[None, :]
    ay = np.abs(y)[None, :]
    for lo in range(0, x.shape[0], chunk):
        xs = x[lo:lo + chunk, None]
        sx = np.sign(xs)
        ker = np.exp(1j * q * (xs - y[None, :]) ** 2)
        b = sig + rho * sx + rho * sy - sig * sx * sy
        ker -= b * np.exp(1j * q * (np.abs(xs) + ay) ** 2)
        out[lo:lo + chunk] = ker @ c
    return out


def propagate_sum(x, y, c, t, sig, rho, use_numba=None):
    """``sum_j [e^{i(x-y)^2/4t} - B(x,y) e^{i(|x|+|y|)^2/4t}] c_j`` with ``B`` the reflection bracket."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    c = np.ascontiguousarray(c, dtype=np.complex128)
    use = USE_NUMBA if use_numba is None else use_numba
    args = (x, y, c, float(t), float(sig), float(rho))
    return _propagate_nb(*args) if use else _propagate_np(*args)


# ---------------------------------------------------------------------------
# zero-energy shooting, classical RK4 for psi'' = V psi


@njit
def _rk4_nb(v0, vm, v1, h, psi, dpsi):
    n = v0.shape[0]
    ps = np.empty(n + 1)
    ds = np.empty(n + 1)
    ps[0] = psi
    ds[0] = dpsi
    for i in range(n):
        y, z = ps[i], ds[i]
        k1y = z
        k1z = v0[i] * y
        k2y = z + 0.5 * h * k1z
        k2z = vm[i] * (y + 0.5 * h * k1y)
        k3y = z + 0.5 * h * k2z
        k3z = vm[i] * (y + 0.5 * h * k2y)
        k4y = z + h * k3z
        k4z = v1[i] * (y + h * k3y)
        ps[i + 1] = y + h / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y)
        ds[i + 1] = z + h / 6.0 * (k1z + 2 * k2z + 2 * k3z + k4z)
    return ps, ds


def _rk4_np(v0, vm, v1, h, psi, dpsi):
    # RK4 is linear here: build every step's 2x2 update, then chain them.
    n = v0.shape[0]
    eye = np.broadcast_to(np.eye(2), (n, 2, 2))

    def jac(v):
        j = np.zeros((n, 2, 2))
        j[:, 0, 1] = 1.0
        j[:, 1, 0] = v
        return j

    k1 = jac(v0)
    k2 = jac(vm) @ (eye + 0.5 * h * k1)
    k3 = jac(vm) @ (eye + 0.5 * h * k2)
    k4 = jac(v1) @ (eye + h * k3)
    step = eye + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    ys = np.empty((n + 1, 2))
    ys[0] = psi, dpsi
    for i in range(n):
        ys[i + 1] = step[i] @ ys[i]
    return ys[:, 0].copy(), ys[:, 1].copy()


def rk4_shoot(v0, vm, v1, h, psi, dpsi, use_numba=None):
    """Integrate ``psi'' = V psi`` over equal steps; V given at step start, middle, end."""
    v0 = np.ascontiguousarray(v0, dtype=np.float64)
    vm = np.ascontiguousarray(vm, dtype=np.float64)
    v1 = np.ascontiguousarray(v1, dtype=np.float64)
    use = USE_NUMBA if use_numba is None else use_numba
    args = (v0, vm, v1, float(h), float(psi), float(dpsi))
    return _rk4_nb(*args) if use else _rk4_np(*args)


# ---------------------------------------------------------------------------
# polyline self-intersection


@njit
def _orient(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


@njit
def _on_segment(ax, ay, bx, by, cx, cy):
    return (min(ax, bx) <= cx <= max(ax, bx)) and (min(ay, by) <= cy <= max(ay, by))


@njit
def _segments_cross(ax, ay, bx, by, cx, cy, dx, dy):
    o1 = _orient(ax, ay, bx, by, cx, cy)
    o2 = _orient(ax, ay, bx, by, dx, dy)
    o3 = _orient(cx, cy, dx, dy, ax, ay)
    o4 = _orient(cx, cy, dx, dy, bx, by)
    if ((o1 > 0 and o2 < 0) or (o1 < 0 and o2 > 0)) and \
            ((o3 > 0 and o4 < 0) or (o3 < 0 and o4 > 0)):
        return True
    if o1 == 0 and _on_segment(ax, ay, bx, by, cx, cy):
        return True
    if o2 == 0 and _on_segment(ax, ay, bx, by, dx, dy):
        return True
    if o3 == 0 and _on_segment(cx, cy, dx, dy, ax, ay):
        return True
    if o4 == 0 and _on_segment(cx, cy, dx, dy, bx, by):
        return True
    return False


@njit
def _first_crossing_nb(x, y):
    nseg = x.shape[0] - 1
    xlo = np.minimum(x[:-1], x[1:])
    xhi = np.maximum(x[:-1], x[1:])
    ylo = np.minimum(y[:-1], y[1:])
    yhi = np.maximum(y[:-1], y[1:])
    for i in range(nseg):
        for j in range(i + 2, nseg):
            if xhi[j] < xlo[i] or xlo[j] > xhi[i] or yhi[j] < ylo[i] or ylo[j] > yhi[i]:
                continue
            if _segments_cross(x[i], y[i], x[i + 1], y[i + 1],
                               x[j], y[j], x[j + 1], y[j + 1]):
                return i, j
    return -1, -1


def _first_crossing_np(x, y):
    nseg = x.shape[0] - 1
    ax, ay, bx, by = x[:-1], y[:-1], x[1:], y[1:]

    def orient(px, py, qx, qy, rx, ry):
        return (qx - px) * (ry - py) - (qy - py) * (rx - px)

    def onseg(px, py, qx, qy, rx, ry):
        return ((np.minimum(px, qx) <= rx) & (rx <= np.maximum(px, qx))
                & (np.minimum(py, qy) <= ry) & (ry <= np.maximum(py, qy)))

    for i in range(nseg - 2):
        cx, cy, dx, dy = ax[i + 2:], ay[i + 2:], bx[i + 2:], by[i + 2:]
        o1 = orient(ax[i], ay[i], bx[i], by[i], cx, cy)
        o2 = orient(ax[i], ay[i], bx[i], by[i], dx, dy)
        o3 = orient(cx, cy, dx, dy, ax[i], ay[i])
        o4 = orient(cx, cy, dx, dy, bx[i], by[i])
        hit = (o1 * o2 < 0) & (o3 * o4 < 0)
        hit |= (o1 == 0) & onseg(ax[i], ay[i], bx[i], by[i], cx, cy)
        hit |= (o2 == 0) & onseg(ax[i], ay[i], bx[i], by[i], dx, dy)
        hit |= (o3 == 0) & onseg(cx, cy, dx, dy, ax[i], ay[i])
        hit |= (o4 == 0) & onseg(cx, cy, dx, dy, bx[i], by[i])
        idx = np.flatnonzero(hit)
        if idx.size:
            return i, i + 2 + int(idx[0])
    return -1, -1


def first_crossing(x, y, use_numba=None):
    """First pair ``(i, j)``, ``j > i + 1``, of crossing polyline segments, else ``(-1, -1)``."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    use = USE_NUMBA if use_numba is None else use_numba
    i, j = _first_crossing_nb(x, y) if use else _first_crossing_np(x, y)
    return int(i), int(j)
