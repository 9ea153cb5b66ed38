"""Numerical check of ``int_M kappa omega = (c_n / 2) chi(M)`` and of the Gauss map degree."""
import dataclasses
import math

import numpy as np

from . import curvature, sphere
from .errors import (ConvergenceFailure, ImmersionDegenerate, NotRegularValue,
                     OddDimension, UnknownTopology)
from .surfaces import volume_element

REGULAR_TOL = 1e-6


def _fsum(values):
    # exactly rounded, hence independent of summation order
    return math.fsum(np.asarray(values, dtype=float).ravel().tolist())


def integrate_scalar(imm, field, grid):
    """``sum_k w_k field(u_k) sqrt(det g(u_k))``.

    ``field`` is a callable on chart points or an array of nodal values.
    """
    vals = field(grid.nodes) if callable(field) else np.asarray(field, dtype=float)
    vol = volume_element(imm, grid.nodes)
    if not np.all(np.isfinite(vol)) or np.any(vol <= 0):
        raise ImmersionDegenerate("degenerate metric at a quadrature node")
    return _fsum(grid.weights * vals * vol)


@dataclasses.dataclass
class GaussBonnetReport:
    integral: float
    integral_shape_path: float
    target: float
    residual: float
    degree_estimate: float
    chi: int
    c_n: float


def gauss_bonnet_check(structure, imm, grid, samples=None):
    """Integrate the translational curvature and compare with ``(c_n/2) chi``.

    The integrand is ``det(Gamma^{-1} D gamma)``; the ``det(-(A+alpha))`` path is
    integrated alongside and reported.
    """
    if imm.n % 2:
        raise OddDimension("the identity needs an even-dimensional hypersurface")
    if samples is None:
        samples = curvature.sample_surface(structure, imm, grid.nodes)
    chi = euler_characteristic(imm)
    c_n = sphere.sphere_volume(imm.n)
    integral = integrate_scalar(imm, samples.kappa, grid)
    other = integrate_scalar(imm, samples.kappa_shape, grid)
    target = 0.5 * c_n * chi
    return GaussBonnetReport(integral, other, target, abs(integral - target),
                             integral / c_n, chi, c_n)


# ---------------------------------------------------------------------------
# degree by signed preimage count


@dataclasses.dataclass
class Preimage:
    u: np.ndarray
    point: np.ndarray
    kappa: float

    @property
    def sign(self):
        return 1 if self.kappa > 0 else -1


def _neighbour_minima(angle, spread, periodic):
    """Mask of grid nodes whose angle is <= every axis neighbour and small."""
    mask = np.ones(angle.shape, dtype=bool)
    for ax, per in enumerate(periodic):
        for shift in (1, -1):
            nb = np.roll(angle, shift, axis=ax)
            if not per:
                idx = [slice(None)] * angle.ndim
                idx[ax] = 0 if shift == 1 else -1
                nb[tuple(idx)] = np.inf
            mask &= angle <= nb
    return mask & (angle <= 2.0 * spread)


def _local_spread(gam, periodic):
    spread = np.zeros(gam.shape[:-1])
    for ax, per in enumerate(periodic):
        for shift in (1, -1):
            nb = np.roll(gam, shift, axis=ax)
            d = np.arccos(np.clip(np.sum(gam * nb, axis=-1), -1.0, 1.0))
            if not per:
                idx = [slice(None)] * spread.ndim
                idx[ax] = 0 if shift == 1 else -1
                d[tuple(idx)] = 0.0
            spread = np.maximum(spread, d)
    return spread


def _newton(structure, imm, u0, target, h, tol=1e-12, max_iter=60):
    u = u0.copy()
    span = imm.upper - imm.lower
    per = np.array(imm.periodic)
    for _ in range(max_iter):
        gam = curvature.gauss_map(structure, imm, u)
        res = gam - target
        if np.linalg.norm(res) < tol:
            return u
        jac = np.empty((target.size, imm.n))
        for i in range(imm.n):
            e = np.zeros(imm.n)
            e[i] = h
            jac[:, i] = (curvature.gauss_map(structure, imm, u + e)
                         - curvature.gauss_map(structure, imm, u - e)) / (2.0 * h)
        step = np.linalg.lstsq(jac, -res, rcond=None)[0]
        lim = 0.25 * span.min()
        if np.linalg.norm(step) > lim:
            step *= lim / np.linalg.norm(step)
        u = u + step
        u[per] = imm.lower[per] + np.mod(u[per] - imm.lower[per], span[per])
        if np.any(~per & ((u < imm.lower) | (u > imm.upper))):
            raise ConvergenceFailure("Newton iterate left the chart")
    if np.linalg.norm(curvature.gauss_map(structure, imm, u) - target) < 1e-9:
        return u
    return None


def find_preimages(structure, imm, grid, target, h=curvature.H_FD):
    """Solutions of ``gamma(u) = target`` seeded from local angle minima on the grid."""
    target = np.asarray(target, dtype=float)
    target = target / np.linalg.norm(target)
    gam = curvature.gauss_map(structure, imm, grid.nodes).reshape(grid.shape + (-1,))
    angle = np.arccos(np.clip(gam @ target, -1.0, 1.0))
    seeds = grid.nodes.reshape(grid.shape + (imm.n,))[
        _neighbour_minima(angle, _local_spread(gam, imm.periodic), imm.periodic)]
    found = []
    for seed in seeds:
        u = _newton(structure, imm, seed, target, h)
        if u is None:
            continue
        pt = imm.eval(u)
        if any(np.linalg.norm(pt - q.point) < 1e-7 for q in found):
            continue
        kap = float(curvature.translational_curvature(structure, imm, u, h).via_gauss_map)
        if abs(kap) <= REGULAR_TOL:
            raise NotRegularValue("target direction is not a regular value")
        found.append(Preimage(u, pt, kap))
    return found


def degree_by_preimage(structure, imm, grid, target_direction=None, seed=0,
                       max_attempts=8, return_preimages=False):
    """Signed count of preimages of a regular value of the Gauss map.

    Without ``target_direction`` a seeded random direction is used.  Failures
    (non-regular value, Newton leaving the chart) retry with a perturbed one.
    """
    if imm.n % 2:
        raise OddDimension("degree check is restricted to even n")
    rng = np.random.default_rng(seed)
    dim = imm.n + 1
    target = (rng.standard_normal(dim) if target_direction is None
              else np.asarray(target_direction, dtype=float))
    last = None
    for _ in range(max_attempts):
        try:
            pre = find_preimages(structure, imm, grid, target)
        except (NotRegularValue, ConvergenceFailure) as exc:
            last = exc
            target = target / np.linalg.norm(target) + 0.05 * rng.standard_normal(dim)
            continue
        deg = int(sum(q.sign for q in pre))
        return (deg, pre) if return_preimages else deg
    raise last


# ---------------------------------------------------------------------------
# Euler characteristic


def euler_characteristic(imm, grid_shape=None):
    """chi from the immersion's topology tag, optionally cross-checked on a mesh.

    With ``grid_shape`` (n = 2 only) the chart grid is triangulated respecting
    periodic identifications and collapsed pole rows; a mismatch raises
    :class:`UnknownTopology`.
    """
    if imm.chi is None:
        raise UnknownTopology("immersion carries no Euler characteristic")
    if grid_shape is not None:
        mesh_chi = mesh_euler_characteristic(imm, grid_shape)
        if mesh_chi != imm.chi:
            raise UnknownTopology(f"topology tag chi={imm.chi} but mesh gives {mesh_chi}")
    return imm.chi


def mesh_euler_characteristic(imm, shape):
    """``V - E + F`` of the triangulated chart grid (n = 2)."""
    if imm.n != 2:
        raise UnknownTopology("mesh Euler characteristic only for n = 2")
    n0, n1 = shape
    per0, per1 = imm.periodic
    coll = list(imm.collapsed) + [False] * 2
    # collapsed flags refer to the non-periodic axes in order
    nonper = [ax for ax in (0, 1) if not imm.periodic[ax]]
    collapsed_axes = {ax for ax, c in zip(nonper, coll) if c}

    def vid(i, j):
        if 0 in collapsed_axes and i < 0:
            return ("pole", 0, -1)
        if 0 in collapsed_axes and i >= n0:
            return ("pole", 0, 1)
        if 1 in collapsed_axes and j < 0:
            return ("pole", 1, -1)
        if 1 in collapsed_axes and j >= n1:
            return ("pole", 1, 1)
        return (i % n0 if per0 else i, j % n1 if per1 else j)

    i_range = range(-1, n0) if 0 in collapsed_axes else range(n0 if per0 else n0 - 1)
    j_range = range(-1, n1) if 1 in collapsed_axes else range(n1 if per1 else n1 - 1)
    faces = set()
    for i in i_range:
        for j in j_range:
            a, b, c, d = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
            for tri in ((a, b, c), (a, c, d)):
                if len(set(tri)) == 3:
                    faces.add(frozenset(tri))
    edges = set()
    verts = set()
    for f in faces:
        t = list(f)
        verts.update(t)
        edges.update(frozenset(e) for e in ((t[0], t[1]), (t[1], t[2]), (t[0], t[2])))
    return len(verts) - len(edges) + len(faces)
