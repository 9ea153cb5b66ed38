"""Translational structures on the sphere.

A structure assigns to each point p an isometry ``Gamma_p`` from ``T_p S^{n+1}``
onto a fixed inner-product space V, represented here as R^{n+1}.  All methods
broadcast over a leading batch axis: ``p`` and ``v`` may be ``(d,)`` or
``(N, d)`` with ``d = n + 2``.
"""
from abc import ABC, abstractmethod

import numpy as np

from . import sphere
from .errors import DomainError, OutOfDomain

GRAM_TOL = 1e-8


class TranslationStructure(ABC):
    """Common interface.  Subclasses implement ``_apply`` and ``_unapply``."""

    ambient_dim: int

    @property
    def model_dimension(self):
        return self.ambient_dim - 1

    def in_domain(self, p):
        return np.ones(np.shape(p)[:-1], dtype=bool)

    def _check(self, p):
        if not np.all(self.in_domain(p)):
            raise OutOfDomain(f"point outside the domain of {type(self).__name__}")

    def apply(self, p, v):
        """``Gamma_p(v)`` as coordinates in V."""
        p = np.asarray(p, dtype=float)
        self._check(p)
        return self._apply(p, np.asarray(v, dtype=float))

    def unapply(self, p, w):
        """``Gamma_p^{-1}(w)``, a tangent vector at p."""
        p = np.asarray(p, dtype=float)
        self._check(p)
        return self._unapply(p, np.asarray(w, dtype=float))

    def invariant_field(self, x, p, q):
        """Value at q of the invariant field generated by ``x`` in ``T_p``."""
        return self.unapply(q, self.apply(p, x))

    @abstractmethod
    def _apply(self, p, v):
        ...

    @abstractmethod
    def _unapply(self, p, w):
        ...


class ParallelTransportStructure(TranslationStructure):
    """Parallel transport to ``T_{p0}`` along minimising geodesics.

    Defined on the sphere minus ``-p0``.  ``basis`` rows fix the identification
    ``T_{p0} = R^{n+1}``; by default :func:`sphere.orthonormal_complement`.
    """

    def __init__(self, p0, basis=None):
        self.p0 = sphere.sphere_point(p0)
        self.ambient_dim = self.p0.size
        if basis is None:
            basis = sphere.orthonormal_complement(self.p0)
        basis = np.array(basis, dtype=float)
        if basis.shape != (self.ambient_dim - 1, self.ambient_dim):
            raise DomainError("basis must have shape (n+1, n+2)")
        if (np.abs(basis @ basis.T - np.eye(self.ambient_dim - 1)).max() > 1e-12
                or np.abs(basis @ self.p0).max() > 1e-12):
            raise DomainError("basis must be an orthonormal basis of p0^perp")
        basis.flags.writeable = False
        self.basis = basis

    def in_domain(self, p):
        return 1.0 + np.asarray(p) @ self.p0 > sphere.ANTIPODAL_TOL

    def _apply(self, p, v):
        return sphere.parallel_transport(p, self.p0, v) @ self.basis.T

    def _unapply(self, p, w):
        return sphere.parallel_transport(self.p0, p, w @ self.basis)


class FrameStructure(TranslationStructure):
    """Structure induced by an orthonormal frame ``V_1..V_{n+1}``.

    ``frame(p)`` returns an array ``(..., n+1, n+2)`` of frame vectors at the
    batch of points p.  ``Gamma_p(v) = sum <v, V_i(p)> V_i(p0)``, written in the
    coordinates of the orthonormal basis ``V_i(p0)`` of V.  The frame must
    already be orthonormal; the Gram matrix is checked on every evaluation.
    """

    def __init__(self, frame, p0, domain=None, gram_tol=GRAM_TOL):
        self.frame = frame
        self.p0 = sphere.sphere_point(p0)
        self.ambient_dim = self.p0.size
        self.domain = domain
        self.gram_tol = gram_tol

    @classmethod
    def from_parallel(cls, p0, basis=None):
        """Frame ``V_i(p) = tau_{p0}^p(b_i)``; reproduces :class:`ParallelTransportStructure`."""
        pts = ParallelTransportStructure(p0, basis)

        def frame(p):
            p = np.asarray(p, dtype=float)
            lead = p.shape[:-1]
            b = np.broadcast_to(pts.basis, lead + pts.basis.shape)
            pp = np.broadcast_to(p[..., None, :], b.shape)
            return sphere.parallel_transport(pts.p0, pp, b)

        return cls(frame, pts.p0, domain=pts.in_domain)

    def in_domain(self, p):
        if self.domain is None:
            return super().in_domain(p)
        return self.domain(p)

    def _frame(self, p):
        fr = np.asarray(self.frame(p), dtype=float)
        gram = fr @ np.swapaxes(fr, -1, -2)
        if np.abs(gram - np.eye(fr.shape[-2])).max() > self.gram_tol:
            raise DomainError("frame is not orthonormal at a queried point")
        return fr

    def _apply(self, p, v):
        return np.einsum("...ij,...j->...i", self._frame(p), v)

    def _unapply(self, p, w):
        return np.einsum("...ij,...i->...j", self._frame(p), w)


# quaternions as (a, b, c, d) = a + bi + cj + dk


def quat_mul(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    a1, b1, c1, d1 = np.moveaxis(x, -1, 0)
    a2, b2, c2, d2 = np.moveaxis(y, -1, 0)
    return np.stack([
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    ], axis=-1)


def quat_conj(x):
    x = np.asarray(x, dtype=float)
    return x * np.array([1.0, -1.0, -1.0, -1.0])


class QuaternionStructure(TranslationStructure):
    """Left translation on S^3 = unit quaternions; V = imaginary quaternions = R^3.

    ``Gamma_g(v) = Im(conj(g) v)``, ``Gamma_g^{-1}(w) = g (0, w)``.
    """

    ambient_dim = 4
    p0 = np.array([1.0, 0.0, 0.0, 0.0])

    def _apply(self, p, v):
        if p.shape[-1] != 4:
            raise DomainError("quaternion structure requires the ambient S^3")
        return quat_mul(quat_conj(p), v)[..., 1:]

    def _unapply(self, p, w):
        if p.shape[-1] != 4:
            raise DomainError("quaternion structure requires the ambient S^3")
        pure = np.concatenate([np.zeros(w.shape[:-1] + (1,)), w], axis=-1)
        return quat_mul(p, pure)
