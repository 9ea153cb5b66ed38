"""Extrinsic geometry of immersed hypersurfaces and their translational curvature.

All operator matrices are written in the chart frame ``d_1 f, ..., d_n f``
(column i holds the frame coordinates of the image of ``d_i f``).  Functions
accept one chart point ``(n,)`` or a batch ``(N, n)``.
"""
import dataclasses

import numpy as np

from . import sphere
from .errors import AntipodalPoints, EigenSolveFailure
from .surfaces import _as_batch, tangent_frame, unit_normal

H_FD = 1e-4


@dataclasses.dataclass
class LocalFrame:
    """Per-node first-order data shared by the curvature routines."""

    u: np.ndarray
    p: np.ndarray
    frame: np.ndarray
    g: np.ndarray
    eta: np.ndarray

    def to_frame_coords(self, vecs):
        """Frame coordinates of ambient vectors ``vecs`` (N, k, d) -> (N, n, k).

        Least-squares projection onto the span of the frame.
        """
        rhs = np.einsum("nid,nkd->nik", self.frame, vecs)
        return np.linalg.solve(self.g, rhs)


def local_frame(imm, u):
    u, _ = _as_batch(u, imm.n)
    frame, g = tangent_frame(imm, u)
    p = imm.eval(u)
    eta = unit_normal(imm, u, frame=frame, points=p)
    return LocalFrame(u, p, frame, g, eta)


def _out(x, single):
    return x[0] if single else x


def _hessian(imm, lf):
    d2 = imm.second_derivatives(lf.u)
    return np.einsum("nijd,nd->nij", d2, lf.eta)


def shape_operator(imm, u, lf=None):
    """Matrix of ``A = -nabla eta`` in the chart frame: ``g^{-1} H``, ``H_ij = <d_ij f, eta>``."""
    _, single = _as_batch(u, imm.n)
    lf = lf or local_frame(imm, u)
    return _out(np.linalg.solve(lf.g, _hessian(imm, lf)), single)


def _pencil_eigvals(h, g):
    try:
        chol = np.linalg.cholesky(g)
        linv = np.linalg.inv(chol)
        m = linv @ h @ np.swapaxes(linv, -1, -2)
        m = 0.5 * (m + np.swapaxes(m, -1, -2))
        return np.linalg.eigvalsh(m)
    except np.linalg.LinAlgError as exc:
        raise EigenSolveFailure(str(exc)) from exc


def principal_curvatures(imm, u, lf=None):
    """Eigenvalues of the pencil ``H w = lambda g w``, ascending."""
    _, single = _as_batch(u, imm.n)
    lf = lf or local_frame(imm, u)
    lam = _pencil_eigvals(_hessian(imm, lf), lf.g)
    if not np.all(np.isfinite(lam)):
        raise EigenSolveFailure("non-finite principal curvature")
    return _out(lam, single)


def gauss_kronecker(imm, u, lf=None):
    """``det A``."""
    _, single = _as_batch(u, imm.n)
    gk = np.linalg.det(shape_operator(imm, u, lf))
    return float(gk) if single else gk


def gauss_map(structure, imm, u, lf=None):
    """``gamma(p) = Gamma_p(eta(p))`` in V coordinates."""
    _, single = _as_batch(u, imm.n)
    lf = lf or local_frame(imm, u)
    return _out(structure.apply(lf.p, lf.eta), single)


def _shifted(imm, u, i, h):
    e = np.zeros(imm.n)
    e[i] = h
    return u + e, u - e


def gauss_map_derivative(structure, imm, u, h=H_FD, lf=None):
    """``Gamma_p^{-1} o D gamma(p)`` by central differences of gamma along the chart axes."""
    _, single = _as_batch(u, imm.n)
    lf = lf or local_frame(imm, u)
    cols = []
    for i in range(imm.n):
        up, um = _shifted(imm, lf.u, i, h)
        dgam = (gauss_map(structure, imm, up) - gauss_map(structure, imm, um)) / (2.0 * h)
        cols.append(structure.unapply(lf.p, dgam))
    return _out(lf.to_frame_coords(np.stack(cols, axis=1)), single)


def c_function(p0, imm, u, lf=None):
    """``c(p) = <eta(p), p0> / (1 + <p, p0>)``."""
    _, single = _as_batch(u, imm.n)
    lf = lf or local_frame(imm, u)
    p0 = np.asarray(p0, dtype=float)
    denom = 1.0 + lf.p @ p0
    if np.any(denom <= sphere.ANTIPODAL_TOL):
        raise AntipodalPoints("surface meets -p0")
    return _out((lf.eta @ p0) / denom, single)


def invariant_shape_operator(structure, imm, u, h=H_FD, lf=None):
    """``alpha_p(X) = nabla_X`` of the invariant extension of ``eta(p)``.

    The invariant field is sampled at ``f(u +- h e_i)``, differenced, and
    projected onto ``T_p S^{n+1}``.
    """
    _, single = _as_batch(u, imm.n)
    lf = lf or local_frame(imm, u)
    cols = []
    for i in range(imm.n):
        up, um = _shifted(imm, lf.u, i, h)
        vp = structure.invariant_field(lf.eta, lf.p, imm.eval(up))
        vm = structure.invariant_field(lf.eta, lf.p, imm.eval(um))
        cols.append(sphere.tangent_project(lf.p, (vp - vm) / (2.0 * h)))
    return _out(lf.to_frame_coords(np.stack(cols, axis=1)), single)


@dataclasses.dataclass
class TranslationalCurvature:
    via_gauss_map: np.ndarray
    via_shape_operators: np.ndarray

    @property
    def difference(self):
        return self.via_gauss_map - self.via_shape_operators


def translational_curvature(structure, imm, u, h=H_FD, lf=None):
    """``kappa = det(Gamma_p^{-1} D gamma)`` and ``det(-(A + alpha))``, both reported."""
    _, single = _as_batch(u, imm.n)
    lf = lf or local_frame(imm, u)
    dg = gauss_map_derivative(structure, imm, lf.u, h, lf)
    a = shape_operator(imm, lf.u, lf)
    alpha = invariant_shape_operator(structure, imm, lf.u, h, lf)
    k1 = np.linalg.det(dg)
    k2 = np.linalg.det(-(a + alpha))
    return TranslationalCurvature(_out(k1, single), _out(k2, single))


@dataclasses.dataclass
class CurvatureSample:
    """Struct-of-arrays record; axis 0 runs over chart nodes."""

    u: np.ndarray
    p: np.ndarray
    eta: np.ndarray
    g: np.ndarray
    A: np.ndarray
    lam: np.ndarray
    c: np.ndarray
    alpha: np.ndarray
    dgamma: np.ndarray
    kappa: np.ndarray
    kappa_shape: np.ndarray
    gk: np.ndarray
    gamma: np.ndarray

    @property
    def prop_residual(self):
        """``max |Dgamma_pullback + (A + alpha)|`` per node."""
        return np.abs(self.dgamma + self.A + self.alpha).max(axis=(1, 2))

    def __len__(self):
        return self.u.shape[0]


def sample_surface(structure, imm, u, p0=None, h=H_FD):
    """Evaluate every curvature quantity at the chart nodes ``u``.

    ``p0`` is the reference point of ``c(p)``; it defaults to the structure's
    base point.
    """
    u, _ = _as_batch(u, imm.n)
    lf = local_frame(imm, u)
    hess = _hessian(imm, lf)
    a = np.linalg.solve(lf.g, hess)
    lam = _pencil_eigvals(hess, lf.g)
    alpha = invariant_shape_operator(structure, imm, u, h, lf)
    dg = gauss_map_derivative(structure, imm, u, h, lf)
    if p0 is None:
        p0 = structure.p0
    c = c_function(p0, imm, u, lf)
    return CurvatureSample(
        u=u, p=lf.p, eta=lf.eta, g=lf.g, A=a, lam=lam, c=c, alpha=alpha,
        dgamma=dg, kappa=np.linalg.det(dg), kappa_shape=np.linalg.det(-(a + alpha)),
        gk=np.linalg.det(a), gamma=structure.apply(lf.p, lf.eta),
    )


def alpha_split(alpha, g):
    """Symmetric and skew parts of alpha with respect to the metric g.

    Returns ``(sym, skew)`` of the bilinear form ``g alpha``; the engine records
    both and makes no symmetry claim.
    """
    b = g @ alpha
    bt = np.swapaxes(b, -1, -2)
    return 0.5 * (b + bt), 0.5 * (b - bt)
