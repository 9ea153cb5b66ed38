"""Hot numeric kernels with a numba path and a pure-numpy path.

Every kernel exists twice: ``<name>_numpy`` (vectorised numpy) and
``<name>_numba`` (compiled loops).  The transport kernels dispatch to numba
whenever it imports and ``TRANSGAUSS_NUMBA`` is not ``0``; the other two
always take the numpy path, which measures faster.

All kernels take batched float64 arrays with the batch on axis 0 and never
reduce across the batch, so both paths are deterministic.
"""
import os

import numpy as np

try:
    import numba as nb
except ImportError:  # pragma: no cover - numba is a declared dependency
    nb = None

_FLAG = os.environ.get("TRANSGAUSS_NUMBA", "1").strip().lower()
USE_NUMBA = nb is not None and _FLAG not in ("0", "false", "no", "off")
BACKEND = "numba" if USE_NUMBA else "numpy"

_TINY = 1e-15


# ---------------------------------------------------------------------------
# closed-form parallel transport on the unit sphere


def transport_closed_numpy(p, q, v):
    pq = np.einsum("ij,ij->i", p, q)
    vq = np.einsum("ij,ij->i", v, q)
    return v - (vq / (1.0 + pq))[:, None] * (q + p)


def _transport_closed_loop(p, q, v):
    n, d = p.shape
    out = np.empty_like(v)
    for i in range(n):
        pq = 0.0
        vq = 0.0
        for k in range(d):
            pq += p[i, k] * q[i, k]
            vq += v[i, k] * q[i, k]
        coef = vq / (1.0 + pq)
        for k in range(d):
            out[i, k] = v[i, k] - coef * (q[i, k] + p[i, k])
    return out


# ---------------------------------------------------------------------------
# RK4 integration of the parallel-transport ODE  X' = -<X, b'> b


def _geodesic_setup(p, q):
    pq = np.einsum("ij,ij->i", p, q)
    perp = q - pq[:, None] * p
    s = np.sqrt(np.einsum("ij,ij->i", perp, perp))
    length = np.arctan2(s, pq)
    qbar = np.zeros_like(p)
    ok = s > _TINY
    qbar[ok] = perp[ok] / s[ok, None]
    return qbar, length


def transport_rk4_numpy(p, q, v, steps):
    qbar, length = _geodesic_setup(p, q)
    h = length / steps
    x = v.copy()

    def rhs(t, x):
        c = np.cos(t)[:, None]
        s = np.sin(t)[:, None]
        beta = c * p + s * qbar
        dbeta = -s * p + c * qbar
        return -np.einsum("ij,ij->i", x, dbeta)[:, None] * beta

    hh = h[:, None]
    for k in range(steps):
        t = k * h
        k1 = rhs(t, x)
        k2 = rhs(t + 0.5 * h, x + 0.5 * hh * k1)
        k3 = rhs(t + 0.5 * h, x + 0.5 * hh * k2)
        k4 = rhs(t + h, x + hh * k3)
        x = x + hh / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return x


def _rk4_rhs(t, x, p, qbar, out):
    c = np.cos(t)
    s = np.sin(t)
    d = x.shape[0]
    dot = 0.0
    for k in range(d):
        dot += x[k] * (-s * p[k] + c * qbar[k])
    for k in range(d):
        out[k] = -dot * (c * p[k] + s * qbar[k])


def _transport_rk4_loop(p, q, v, steps):
    n, d = p.shape
    out = np.empty_like(v)
    k1 = np.empty(d)
    k2 = np.empty(d)
    k3 = np.empty(d)
    k4 = np.empty(d)
    tmp = np.empty(d)
    qbar = np.empty(d)
    for i in range(n):
        pq = 0.0
        for k in range(d):
            pq += p[i, k] * q[i, k]
        ss = 0.0
        for k in range(d):
            qbar[k] = q[i, k] - pq * p[i, k]
            ss += qbar[k] * qbar[k]
        s = np.sqrt(ss)
        x = v[i].copy()
        if s <= _TINY:
            out[i] = x
            continue
        for k in range(d):
            qbar[k] /= s
        h = np.arctan2(s, pq) / steps
        pi = p[i]
        for j in range(steps):
            t = j * h
            _rk4_rhs(t, x, pi, qbar, k1)
            for k in range(d):
                tmp[k] = x[k] + 0.5 * h * k1[k]
            _rk4_rhs(t + 0.5 * h, tmp, pi, qbar, k2)
            for k in range(d):
                tmp[k] = x[k] + 0.5 * h * k2[k]
            _rk4_rhs(t + 0.5 * h, tmp, pi, qbar, k3)
            for k in range(d):
                tmp[k] = x[k] + h * k3[k]
            _rk4_rhs(t + h, tmp, pi, qbar, k4)
            for k in range(d):
                x[k] += h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k])
        out[i] = x
    return out


# ---------------------------------------------------------------------------
# generalised cross product: N with det[a_1; ...; a_{m-1}; N] = |N|^2


def generalized_cross_numpy(a):
    nb_, rows, m = a.shape
    out = np.empty((nb_, m))
    cols = np.arange(m)
    for k in range(m):
        minor = a[:, :, cols != k]
        out[:, k] = (-1.0) ** (m - 1 + k) * np.linalg.det(minor)
    return out


def _generalized_cross_loop(a):
    nb_, rows, m = a.shape
    out = np.empty((nb_, m))
    minor = np.empty((rows, rows))
    for i in range(nb_):
        for k in range(m):
            for r in range(rows):
                c2 = 0
                for c in range(m):
                    if c != k:
                        minor[r, c2] = a[i, r, c]
                        c2 += 1
            sign = 1.0 if (m - 1 + k) % 2 == 0 else -1.0
            out[i, k] = sign * np.linalg.det(minor)
    return out


# ---------------------------------------------------------------------------
# brute-force minimax scan: for each centre, the largest <centre, sample>

_CHUNK = 64


def max_dot_numpy(centers, samples):
    out = np.empty(centers.shape[0])
    for start in range(0, centers.shape[0], _CHUNK):
        block = centers[start:start + _CHUNK] @ samples.T
        out[start:start + _CHUNK] = block.max(axis=1)
    return out


if nb is not None:
    transport_closed_numba = nb.njit(cache=True)(_transport_closed_loop)
    _rk4_rhs = nb.njit(cache=True, inline="always")(_rk4_rhs)
    transport_rk4_numba = nb.njit(cache=True)(_transport_rk4_loop)
    generalized_cross_numba = nb.njit(cache=True)(_generalized_cross_loop)

    @nb.njit(cache=True, parallel=True)
    def max_dot_numba(centers, samples):
        nc, d = centers.shape
        ns = samples.shape[0]
        out = np.empty(nc)
        for i in nb.prange(nc):
            best = -np.inf
            for j in range(ns):
                acc = 0.0
                for k in range(d):
                    acc += centers[i, k] * samples[j, k]
                if acc > best:
                    best = acc
            out[i] = best
        return out
else:  # pragma: no cover
    transport_closed_numba = transport_closed_numpy
    transport_rk4_numba = transport_rk4_numpy
    generalized_cross_numba = generalized_cross_numpy
    max_dot_numba = max_dot_numpy


def _f64(*arrays):
    return tuple(np.ascontiguousarray(a, dtype=np.float64) for a in arrays)


def transport_closed(p, q, v):
    p, q, v = _f64(p, q, v)
    if USE_NUMBA:
        return transport_closed_numba(p, q, v)
    return transport_closed_numpy(p, q, v)


def transport_rk4(p, q, v, steps):
    p, q, v = _f64(p, q, v)
    if USE_NUMBA:
        return transport_rk4_numba(p, q, v, int(steps))
    return transport_rk4_numpy(p, q, v, int(steps))


# The batched-determinant and chunked-gemm numpy paths beat the compiled loops
# (see benchmarks/bench_kernels.py), so these two dispatch to numpy; the numba
# variants stay available through KERNELS.


def generalized_cross(a):
    (a,) = _f64(a)
    return generalized_cross_numpy(a)


def max_dot(centers, samples):
    centers, samples = _f64(centers, samples)
    return max_dot_numpy(centers, samples)


KERNELS = {
    "transport_closed": (transport_closed_numpy, transport_closed_numba),
    "transport_rk4": (transport_rk4_numpy, transport_rk4_numba),
    "generalized_cross": (generalized_cross_numpy, generalized_cross_numba),
    "max_dot": (max_dot_numpy, max_dot_numba),
}
