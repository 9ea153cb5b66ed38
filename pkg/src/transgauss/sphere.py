"""Embedded geometry of the unit sphere S^{n+1} in R^{n+2}.

Points and tangent vectors are plain float arrays; ``sphere_point`` and
``tangent_vector`` validate them.  The dimension is whatever the array length
says, so the same code serves S^2, S^3 and S^5.
"""
import math

import numpy as np

from . import _kernels
from .errors import AntipodalPoints, DomainError

UNIT_TOL = 1e-12
TANGENT_TOL = 1e-10
ANTIPODAL_TOL = 1e-10


def sphere_point(v, tol=UNIT_TOL):
    """Return ``v`` as a read-only float array, checking it is a unit vector."""
    p = np.array(v, dtype=float)
    if p.ndim != 1 or not np.all(np.isfinite(p)):
        raise DomainError("sphere point must be a finite 1-d vector")
    if abs(np.linalg.norm(p) - 1.0) > tol:
        raise DomainError(f"not a unit vector (norm {np.linalg.norm(p)!r})")
    p.flags.writeable = False
    return p


def tangent_vector(p, v, tol=TANGENT_TOL):
    v = np.array(v, dtype=float)
    if v.shape != np.shape(p) or not np.all(np.isfinite(v)):
        raise DomainError("tangent vector must be finite and match the base point")
    if abs(float(np.dot(v, p))) > tol:
        raise DomainError("vector is not tangent at the base point")
    v.flags.writeable = False
    return v


def basis_vector(k, dim):
    e = np.zeros(dim)
    e[k] = 1.0
    return e


def geodesic_distance(p, q):
    """Great-circle distance ``arccos <p, q>``; broadcasts over leading axes."""
    return np.arccos(np.clip(np.sum(np.multiply(p, q), axis=-1), -1.0, 1.0))


def exp_map(p, v):
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v, axis=-1, keepdims=True)
    safe = np.where(norm < 1e-14, 1.0, norm)
    out = np.cos(norm) * p + np.sin(norm) * v / safe
    return np.where(norm < 1e-14, p, out)


def tangent_project(p, w):
    p = np.asarray(p, dtype=float)
    w = np.asarray(w, dtype=float)
    return w - np.sum(w * p, axis=-1, keepdims=True) * p


def _batch(p, q, v):
    p, q, v = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (p, q, v)))
    shape = v.shape
    return (p.reshape(-1, shape[-1]), q.reshape(-1, shape[-1]),
            v.reshape(-1, shape[-1]), shape)


def _check_antipodal(p, q):
    gap = 1.0 + np.einsum("ij,ij->i", p, q)
    if np.any(gap <= ANTIPODAL_TOL):
        raise AntipodalPoints("parallel transport undefined between antipodal points")


def parallel_transport(p, q, v):
    """Transport ``v`` from ``T_p`` to ``T_q`` along the minimising geodesic.

    Closed form ``v - <v,q>/(1+<q,p>) (q+p)``.  Broadcasts over leading axes.
    """
    p2, q2, v2, shape = _batch(p, q, v)
    _check_antipodal(p2, q2)
    return _kernels.transport_closed(p2, q2, v2).reshape(shape)


def parallel_transport_ode(p, q, v, steps=10_000):
    """Independent oracle: fixed-step RK4 on ``X' = -<X, b'> b`` along the geodesic b."""
    if steps < 2:
        raise DomainError("steps must be >= 2")
    p2, q2, v2, shape = _batch(p, q, v)
    _check_antipodal(p2, q2)
    return _kernels.transport_rk4(p2, q2, v2, steps).reshape(shape)


def sphere_volume(n):
    """Volume ``c_n`` of the unit n-sphere S^n in R^{n+1}."""
    if n < 1:
        raise DomainError("n must be >= 1")
    return 2.0 * math.pi ** ((n + 1) / 2.0) / math.gamma((n + 1) / 2.0)


def orthonormal_complement(p0):
    """Rows ``b_1..b_{n+1}`` spanning ``p0^perp`` with ``det[b_1..b_{n+1}, p0] = +1``.

    Built from the Householder reflection swapping ``p0`` and the last basis
    vector, so for ``p0 = e_{n+2}`` the result is ``e_1..e_{n+1}``.
    """
    p0 = np.asarray(p0, dtype=float)
    dim = p0.size
    u = p0 - basis_vector(dim - 1, dim)
    uu = float(u @ u)
    if uu < 1e-30:
        return np.eye(dim)[: dim - 1].copy()
    house = np.eye(dim) - 2.0 * np.outer(u, u) / uu
    rows = house[: dim - 1].copy()
    if np.linalg.det(np.vstack([rows, p0])) < 0:
        rows[0] *= -1.0
    return rows


def rotation_to(a, b):
    """A proper rotation R (det +1) with ``R a = b`` for unit vectors a, b."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    dim = a.size
    # product of two reflections: a -> (a+b)/|a+b| axis then onto b
    if np.linalg.norm(a - b) < 1e-15:
        return np.eye(dim)
    if np.linalg.norm(a + b) < 1e-12:
        # half-turn in a plane containing a
        w = orthonormal_complement(a)[0]
        return np.eye(dim) - 2.0 * np.outer(a, a) - 2.0 * np.outer(w, w)
    m = (a + b) / np.linalg.norm(a + b)
    ref_a = np.eye(dim) - 2.0 * np.outer(a, a)
    ref_m = np.eye(dim) - 2.0 * np.outer(m, m)
    return ref_m @ ref_a
