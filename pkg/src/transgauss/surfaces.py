"""Parametric immersed hypersurfaces of S^{n+1} and quadrature grids on their charts."""
import dataclasses
import math
from typing import Callable, Optional

import numpy as np

from . import _kernels, sphere
from .errors import DomainError, ImmersionDegenerate

H_FD1 = 1e-5
H_FD2 = 1e-4
SINGULAR_TOL = 1e-8


# ---------------------------------------------------------------------------
# hyperspherical chart of S^m with analytic derivatives
#
# x_j = sin(a_0)...sin(a_{j-1}) cos(a_j)  for j < m,   x_m = sin(a_0)...sin(a_{m-1})

_ONE, _SIN, _COS = 0, 1, 2


def _factor_table(m):
    table = np.zeros((m + 1, m), dtype=int)
    for j in range(m + 1):
        table[j, :j] = _SIN
        if j < m:
            table[j, j] = _COS
    return table


def sphere_chart(angles):
    """Point, first and second derivatives of the chart of S^m at ``angles`` (N, m)."""
    angles = np.asarray(angles, dtype=float)
    nb, m = angles.shape
    table = _factor_table(m)
    s, c = np.sin(angles), np.cos(angles)
    # value / first / second derivative of each factor, shape (N, m+1, m)
    val = np.where(table == _SIN, s[:, None, :], np.where(table == _COS, c[:, None, :], 1.0))
    d1 = np.where(table == _SIN, c[:, None, :], np.where(table == _COS, -s[:, None, :], 0.0))
    d2 = np.where(table == _SIN, -s[:, None, :], np.where(table == _COS, -c[:, None, :], 0.0))
    x = val.prod(axis=2)
    dx = np.empty((nb, m, m + 1))
    ddx = np.empty((nb, m, m, m + 1))
    for a in range(m):
        fa = val.copy()
        fa[:, :, a] = d1[:, :, a]
        dx[:, a] = fa.prod(axis=2)
        for b in range(a, m):
            fab = fa.copy()
            fab[:, :, b] = d2[:, :, a] if a == b else d1[:, :, b]
            ddx[:, a, b] = ddx[:, b, a] = fab.prod(axis=2)
    return x, dx, ddx


def _sphere_chart_box(m):
    lower = np.zeros(m)
    upper = np.full(m, math.pi)
    upper[-1] = 2.0 * math.pi
    periodic = (False,) * (m - 1) + (True,)
    return lower, upper, periodic


# ---------------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class ParametricImmersion:
    """Chart-based immersion ``f : U -> S^{n+1}`` over a box U.

    ``func`` maps ``(N, n)`` chart points to ``(N, n+2)``; ``d1`` / ``d2``
    optionally return ``(N, n, n+2)`` / ``(N, n, n, n+2)`` analytic derivatives.
    Missing derivatives fall back to central differences.  ``collapsed`` marks
    non-periodic axes whose ends map to single points (chart poles).
    """

    n: int
    lower: np.ndarray
    upper: np.ndarray
    periodic: tuple
    func: Callable
    d1: Optional[Callable] = None
    d2: Optional[Callable] = None
    orientation_sign: int = 1
    topology: str = "other"
    chi: Optional[int] = None
    collapsed: tuple = ()
    h_fd1: float = H_FD1
    h_fd2: float = H_FD2
    name: str = "immersion"
    params: dict = dataclasses.field(default_factory=dict)

    @property
    def ambient_dim(self):
        return self.n + 2

    def with_orientation(self, sign):
        if sign not in (1, -1):
            raise DomainError("orientation_sign must be +1 or -1")
        return dataclasses.replace(self, orientation_sign=sign)

    def flipped(self):
        return self.with_orientation(-self.orientation_sign)

    def domain_volume(self):
        return float(np.prod(self.upper - self.lower))

    def eval(self, u):
        u, single = _as_batch(u, self.n)
        out = np.asarray(self.func(u), dtype=float)
        return out[0] if single else out

    def first_derivatives(self, u):
        u, single = _as_batch(u, self.n)
        if self.d1 is not None:
            out = np.asarray(self.d1(u), dtype=float)
        else:
            h = self.h_fd1
            out = np.empty((u.shape[0], self.n, self.ambient_dim))
            for i in range(self.n):
                e = np.zeros(self.n)
                e[i] = h
                out[:, i] = (self.func(u + e) - self.func(u - e)) / (2.0 * h)
        return out[0] if single else out

    def second_derivatives(self, u):
        u, single = _as_batch(u, self.n)
        if self.d2 is not None:
            out = np.asarray(self.d2(u), dtype=float)
        else:
            out = self._fd_second(u)
        return out[0] if single else out

    def _fd_second(self, u):
        n, h = self.n, self.h_fd2
        out = np.empty((u.shape[0], n, n, self.ambient_dim))
        eye = np.eye(n) * h
        if self.d1 is not None:
            for i in range(n):
                diff = (self.d1(u + eye[i]) - self.d1(u - eye[i])) / (2.0 * h)
                out[:, i] = diff
            return 0.5 * (out + np.swapaxes(out, 1, 2))
        f0 = self.func(u)
        for i in range(n):
            out[:, i, i] = (self.func(u + eye[i]) - 2.0 * f0 + self.func(u - eye[i])) / h**2
            for j in range(i + 1, n):
                pp = self.func(u + eye[i] + eye[j])
                pm = self.func(u + eye[i] - eye[j])
                mp = self.func(u - eye[i] + eye[j])
                mm = self.func(u - eye[i] - eye[j])
                out[:, i, j] = out[:, j, i] = (pp - pm - mp + mm) / (4.0 * h**2)
        return out


def _as_batch(u, n):
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        if u.shape[0] != n:
            raise DomainError(f"chart point must have {n} coordinates")
        return u[None, :], True
    if u.ndim != 2 or u.shape[1] != n:
        raise DomainError(f"chart points must have shape (N, {n})")
    return u, False


def euler_characteristic_of_sphere(n):
    return 1 + (-1) ** n


# ---------------------------------------------------------------------------
# built-in families


def make_clifford(n, r, orientation_sign=1):
    """``M_r = S^1(r) x S^{n-1}(s)``, ``s = sqrt(1 - r^2)``.

    Chart ``(theta, phi_1..phi_{n-1}) -> (r cos theta, +-r sin theta, s omega(phi))``.
    The sign of the second coordinate is chosen so that ``orientation_sign=+1``
    selects the normal ``(s x / r, -r y / s)``, for which the theta direction
    has principal curvature ``-s/r`` and the sphere factor ``r/s``.
    """
    if not 0.0 < r < 1.0:
        raise DomainError("r must lie in (0, 1)")
    if n < 2:
        raise DomainError("n must be >= 2")
    s = math.sqrt(1.0 - r * r)
    m = n - 1
    lo_w, up_w, per_w = _sphere_chart_box(m)
    lower = np.concatenate([[0.0], lo_w])
    upper = np.concatenate([[2.0 * math.pi], up_w])
    periodic = (True,) + per_w

    def build(sigma):
        def func(u):
            w, _, _ = sphere_chart(u[:, 1:])
            th = u[:, 0]
            return np.column_stack([r * np.cos(th), sigma * r * np.sin(th), s * w])

        def d1(u):
            w, dw, _ = sphere_chart(u[:, 1:])
            th = u[:, 0]
            out = np.zeros((u.shape[0], n, n + 2))
            out[:, 0, 0] = -r * np.sin(th)
            out[:, 0, 1] = sigma * r * np.cos(th)
            out[:, 1:, 2:] = s * dw
            return out

        def d2(u):
            w, dw, ddw = sphere_chart(u[:, 1:])
            th = u[:, 0]
            out = np.zeros((u.shape[0], n, n, n + 2))
            out[:, 0, 0, 0] = -r * np.cos(th)
            out[:, 0, 0, 1] = -sigma * r * np.sin(th)
            out[:, 1:, 1:, 2:] = s * ddw
            return out

        return func, d1, d2

    ref = 0.5 * (lower + upper) + 0.1
    func, d1, d2 = build(1.0)
    x = func(ref[None])[0]
    reference_normal = np.concatenate([x[:2] * s / r, -x[2:] * r / s])
    mat = np.vstack([d1(ref[None])[0], reference_normal, x])
    sigma = 1.0 if np.linalg.det(mat) > 0 else -1.0
    func, d1, d2 = build(sigma)
    chi = 0
    return ParametricImmersion(
        n=n, lower=lower, upper=upper, periodic=periodic, func=func, d1=d1, d2=d2,
        orientation_sign=orientation_sign, topology="torus" if n == 2 else "other",
        chi=chi, collapsed=(), name="clifford",
        params={"n": n, "r": r},
    )


def _bump(w, dw, ddw, k):
    """``Re(z^k)`` with ``z = w_{-2} + i w_{-1}`` and its chart derivatives."""
    z = w[:, -2] + 1j * w[:, -1]
    dz = dw[:, :, -2] + 1j * dw[:, :, -1]
    ddz = ddw[:, :, :, -2] + 1j * ddw[:, :, :, -1]
    zk = z**k
    zk1 = k * z ** (k - 1) if k >= 1 else np.zeros_like(z)
    zk2 = k * (k - 1) * z ** max(k - 2, 0) if k >= 2 else np.zeros_like(z)
    b = zk.real
    db = (zk1[:, None] * dz).real
    ddb = (zk2[:, None, None] * dz[:, :, None] * dz[:, None, :]
           + zk1[:, None, None] * ddz).real
    return b, db, ddb


def _radial(p0, rho, n, amplitude, frequency, orientation_sign, name):
    p0 = sphere.sphere_point(p0)
    if p0.size != n + 2:
        raise DomainError("centre dimension must be n + 2")
    basis = sphere.orthonormal_complement(p0)
    lower, upper, periodic = _sphere_chart_box(n)
    k = int(frequency)
    a = float(amplitude)

    def radius(u):
        w, dw, ddw = sphere_chart(u)
        if a == 0.0:
            zero = np.zeros(u.shape[0])
            return w, dw, ddw, rho + zero, np.zeros((u.shape[0], n)), np.zeros((u.shape[0], n, n))
        b, db, ddb = _bump(w, dw, ddw, k)
        return w, dw, ddw, rho + a * b, a * db, a * ddb

    def make(E):
        def func(u):
            w, _, _, rr, _, _ = radius(u)
            return np.cos(rr)[:, None] * p0 + np.sin(rr)[:, None] * (w @ E)

        def d1(u):
            w, dw, _, rr, dr, _ = radius(u)
            cr, sr = np.cos(rr)[:, None, None], np.sin(rr)[:, None, None]
            W = (w @ E)[:, None, :]
            return (-sr * dr[:, :, None] * p0 + cr * dr[:, :, None] * W + sr * (dw @ E))

        def d2(u):
            w, dw, ddw, rr, dr, ddr = radius(u)
            cr = np.cos(rr)[:, None, None, None]
            sr = np.sin(rr)[:, None, None, None]
            W = (w @ E)[:, None, None, :]
            dW = dw @ E
            rirj = (dr[:, :, None] * dr[:, None, :])[..., None]
            rij = ddr[..., None]
            return (-cr * rirj * p0 - sr * rij * p0 - sr * rirj * W + cr * rij * W
                    + cr * dr[:, None, :, None] * dW[:, :, None, :]
                    + cr * dr[:, :, None, None] * dW[:, None, :, :]
                    + sr * (ddw @ E))

        return func, d1, d2

    # choose the handedness of the p0-complement so that +1 selects the normal
    # pointing away from p0
    ref = (0.5 * (lower + upper) + 0.1)[None]
    w, dw, _ = sphere_chart(ref)
    mat = np.vstack([math.sin(rho) * (dw[0] @ basis),
                     -math.sin(rho) * p0 + math.cos(rho) * (w[0] @ basis),
                     math.cos(rho) * p0 + math.sin(rho) * (w[0] @ basis)])
    if np.linalg.det(mat) < 0:
        basis = basis.copy()
        basis[0] *= -1.0
    func, d1, d2 = make(basis)
    return ParametricImmersion(
        n=n, lower=lower, upper=upper, periodic=periodic, func=func, d1=d1, d2=d2,
        orientation_sign=orientation_sign, topology="sphere",
        chi=euler_characteristic_of_sphere(n), collapsed=(True,) * (n - 1),
        name=name,
        params={"center": p0.tolist(), "rho": rho, "n": n,
                "amplitude": a, "frequency": k, "basis": basis},
    )


def make_geodesic_sphere(p0, rho, n=None, orientation_sign=1):
    """Geodesic sphere ``cos(rho) p0 + sin(rho) omega(u)`` of radius rho about p0."""
    if not 0.0 < rho < math.pi:
        raise DomainError("rho must lie in (0, pi)")
    if n is None:
        n = len(p0) - 2
    return _radial(p0, rho, n, 0.0, 0, orientation_sign, "geodesic_sphere")


def make_perturbed_sphere(p0, rho, amplitude, frequency, n=None, orientation_sign=1):
    """Radial graph ``rho + a Re((w_n + i w_{n+1})^k)`` over the geodesic sphere.

    The bump is the restriction of a harmonic polynomial, so it is smooth
    across chart poles and bounded by 1.
    """
    if amplitude < 0:
        raise DomainError("amplitude must be >= 0")
    if not (rho > 0 and rho + amplitude < math.pi / 2):
        raise DomainError("need rho > 0 and rho + amplitude < pi/2")
    if amplitude > 0 and (int(frequency) != frequency or frequency < 1):
        raise DomainError("frequency must be a positive integer")
    if n is None:
        n = len(p0) - 2
    if amplitude > 0 and n < 2:
        raise DomainError("n must be >= 2")
    if amplitude > rho:
        raise DomainError("amplitude must not exceed rho")
    return _radial(p0, rho, n, amplitude, int(frequency), orientation_sign, "perturbed_sphere")


# ---------------------------------------------------------------------------
# frame, metric, normal


def tangent_frame(imm, u):
    """Chart tangent vectors ``d_i f`` (rows) and the metric ``g_ij``."""
    frame = imm.first_derivatives(u)
    batch = frame if frame.ndim == 3 else frame[None]
    sv = np.linalg.svd(batch, compute_uv=False)
    if np.any(sv[:, -1] < SINGULAR_TOL):
        raise ImmersionDegenerate("tangent vectors are (nearly) linearly dependent")
    g = frame @ np.swapaxes(frame, -1, -2)
    return frame, g


def unit_normal(imm, u, frame=None, points=None):
    """Unit normal with ``det[d_1 f, ..., d_n f, eta, f] * orientation_sign > 0``."""
    u_b, single = _as_batch(u, imm.n)
    f = imm.eval(u_b) if points is None else np.asarray(points).reshape(-1, imm.ambient_dim)
    if frame is None:
        frame, _ = tangent_frame(imm, u_b)
    frame = np.asarray(frame).reshape(-1, imm.n, imm.ambient_dim)
    rows = np.concatenate([frame, f[:, None, :]], axis=1)
    cross = _kernels.generalized_cross(rows)
    norm = np.linalg.norm(cross, axis=1)
    if np.any(norm < SINGULAR_TOL**2):
        raise ImmersionDegenerate("cannot determine a unit normal")
    eta = -imm.orientation_sign * cross / norm[:, None]
    return eta[0] if single else eta


# ---------------------------------------------------------------------------
# quadrature


@dataclasses.dataclass(frozen=True)
class QuadratureGrid:
    """Tensor-product rule: ``nodes`` (N, n), ``weights`` (N,), C-ordered over ``shape``."""

    nodes: np.ndarray
    weights: np.ndarray
    shape: tuple
    rules: tuple
    axes: tuple

    @property
    def size(self):
        return self.nodes.shape[0]


def _axis_rule(lo, hi, count, rule):
    if rule == "trapezoid":
        x = lo + (hi - lo) * np.arange(count) / count
        w = np.full(count, (hi - lo) / count)
    elif rule == "gauss-legendre":
        t, w = np.polynomial.legendre.leggauss(count)
        x = 0.5 * (hi - lo) * t + 0.5 * (hi + lo)
        w = 0.5 * (hi - lo) * w
    else:
        raise DomainError(f"unknown quadrature rule {rule!r}")
    return x, w


def make_grid(imm, nodes, rule="auto"):
    """Tensor grid on the chart box.

    ``rule="auto"`` uses the periodic trapezoid rule on periodic axes and
    Gauss-Legendre (interior nodes, so chart poles are never sampled) elsewhere.
    """
    counts = (nodes,) * imm.n if np.isscalar(nodes) else tuple(nodes)
    if len(counts) != imm.n or min(counts) < 1:
        raise DomainError("need a positive node count per axis")
    rules, axes, weights = [], [], []
    for i in range(imm.n):
        r = rule
        if r == "auto":
            r = "trapezoid" if imm.periodic[i] else "gauss-legendre"
        if r == "trapezoid" and not imm.periodic[i]:
            raise DomainError("trapezoid rule requires a periodic axis")
        x, w = _axis_rule(imm.lower[i], imm.upper[i], int(counts[i]), r)
        rules.append(r)
        axes.append(x)
        weights.append(w)
    mesh = np.meshgrid(*axes, indexing="ij")
    wmesh = np.meshgrid(*weights, indexing="ij")
    pts = np.column_stack([m.ravel() for m in mesh])
    wts = np.prod(np.column_stack([m.ravel() for m in wmesh]), axis=1)
    return QuadratureGrid(pts, wts, tuple(int(c) for c in counts), tuple(rules), tuple(axes))


def volume_element(imm, u):
    _, g = tangent_frame(imm, u)
    return np.sqrt(np.linalg.det(g))
