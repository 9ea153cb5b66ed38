"""Central projection of the upper hemisphere and the shrinking maps ``C_t``.

``p0`` is the north pole ``e_{n+2}``.  ``C_t = B^{-1} o (x -> t x) o B`` pulls a
hemisphere-contained surface towards p0; for small t its principal curvatures
exceed 1 in absolute value, which feeds the rigidity certificate with R = pi/2.
"""
import dataclasses
import math

import numpy as np

from . import curvature, rigidity, sphere
from .errors import (DomainError, GKVanishes, MixedCurvatureSigns, NoAdmissibleT,
                     NotInHemisphere, OutsideHemisphere, GeometryError, DegenerateConfiguration)
from .surfaces import ParametricImmersion, unit_normal

HEMI_TOL = 1e-10
T_MAX = 1.0 / math.sqrt(2.0)
SAFETY = 1e-9


@dataclasses.dataclass(frozen=True)
class FlowParams:
    t: float
    dim: int

    def __post_init__(self):
        if not 0.0 < self.t < T_MAX:
            raise DomainError("t must lie in (0, 1/sqrt 2)")

    @property
    def p0(self):
        return sphere.basis_vector(self.dim - 1, self.dim)


@dataclasses.dataclass(frozen=True)
class HemisphereConstants:
    h: float
    eps: float


def _check_hemisphere(p):
    if np.any(np.asarray(p)[..., -1] <= HEMI_TOL):
        raise OutsideHemisphere("point not in the open upper hemisphere")


def _check_t(t):
    if not t > 0:
        raise DomainError("t must be positive")


def beltrami(p):
    """``B(p) = (p_1, ..., p_{n+1}) / p_{n+2}``."""
    p = np.asarray(p, dtype=float)
    _check_hemisphere(p)
    return p[..., :-1] / p[..., -1:]


def beltrami_inverse(x):
    x = np.asarray(x, dtype=float)
    y = np.concatenate([x, np.ones(x.shape[:-1] + (1,))], axis=-1)
    return y / np.linalg.norm(y, axis=-1, keepdims=True)


def m_t(p, t):
    p = np.array(p, dtype=float)
    p[..., -1] /= t
    return p


def c_t(p, t):
    """``C_t(p) = m_t(p) / |m_t(p)|`` with ``m_t(p) = (p_1, ..., p_{n+1}, p_{n+2}/t)``."""
    _check_t(t)
    _check_hemisphere(p)
    m = m_t(p, t)
    return m / np.linalg.norm(m, axis=-1, keepdims=True)


def dc_t(p, v, t):
    """Closed-form differential ``DC_t(p) v``."""
    _check_t(t)
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    _check_hemisphere(p)
    mn = np.linalg.norm(m_t(p, t), axis=-1, keepdims=True)
    pp0 = p[..., -1:]
    vp0 = v[..., -1:]
    p0 = sphere.basis_vector(p.shape[-1] - 1, p.shape[-1])
    coef = (t - 1.0) * vp0 / (t * t * mn**2)
    return (coef * ((t + 1.0) * pp0 * p - t * p0) + v) / mn


def eta_t(p, eta, t):
    """Unit normal of ``C_t(M)`` at ``C_t(p)`` from the normal ``eta`` of M at p."""
    _check_t(t)
    _check_hemisphere(p)
    eta = np.asarray(eta, dtype=float)
    e0 = eta[..., -1:]
    num = eta.copy()
    num[..., -1:] += (t - 1.0) * e0
    return num / np.sqrt(1.0 + (t * t - 1.0) * e0**2)


def f_factor(p, v, eta, t):
    """``F_t(p, v)`` with ``II^t(w/|w|) = F_t(p, v) II(v)`` for unit tangent v."""
    _check_t(t)
    p = np.asarray(p, dtype=float)
    _check_hemisphere(p)
    a = p[..., -1] ** 2
    b = np.asarray(v)[..., -1] ** 2
    e = np.asarray(eta)[..., -1] ** 2
    s = 1.0 - t * t
    return (s * a + t * t) ** 1.5 / (t * (s * (a + b) + t * t) * np.sqrt(1.0 + (t * t - 1.0) * e))


def w_norm_sq(p, v, t):
    """``|DC_t(p) v|^2`` for unit tangent v, closed form."""
    _check_t(t)
    p = np.asarray(p, dtype=float)
    _check_hemisphere(p)
    mn2 = np.sum(m_t(p, t) ** 2, axis=-1)
    a = p[..., -1] ** 2
    b = np.asarray(v)[..., -1] ** 2
    return ((1.0 - t * t) * (a + b) + t * t) / (t * t * mn2 * mn2)


def k_bound(h):
    """``K = h^{3/2} / (6 sqrt 2)``, so that ``F_t >= K/t`` for ``t < 1/sqrt 2``."""
    if not 0.0 < h <= 1.0:
        raise DomainError("h must lie in (0, 1]")
    return h**1.5 / (6.0 * math.sqrt(2.0))


def hemisphere_constants(imm, grid):
    """Grid-sampled ``h <= <x,p0>^2`` and ``eps`` with ``<eta,p0>^2 < 1 - eps^2``."""
    lf = curvature.local_frame(imm, grid.nodes)
    height = lf.p[:, -1]
    if height.min() <= HEMI_TOL:
        raise NotInHemisphere("surface leaves the open upper hemisphere")
    h = float(height.min() ** 2 - SAFETY)
    e2 = float((lf.eta[:, -1] ** 2).max())
    eps = math.sqrt(max(1.0 - e2, 0.0)) - SAFETY
    if not (0.0 < h < 1.0 and 0.0 < eps < 1.0):
        raise NotInHemisphere("hemisphere constants degenerate")
    return HemisphereConstants(h, eps)


# ---------------------------------------------------------------------------
# composed immersions


def rotated(imm, rot):
    """``R o f`` for a proper rotation R; the orientation convention carries over."""
    rot = np.asarray(rot, dtype=float)
    d1 = (lambda u: imm.first_derivatives(u) @ rot.T)
    d2 = (lambda u: imm.second_derivatives(u) @ rot.T)
    return dataclasses.replace(
        imm, func=lambda u: imm.eval(u) @ rot.T, d1=d1, d2=d2,
        name=imm.name + "+rotated", params=dict(imm.params, rotation=rot))


def image_immersion(imm, t):
    """``C_t o f`` with analytic first derivatives via :func:`dc_t`.

    Second derivatives are central differences of the first.  The orientation
    sign is chosen so that the normal agrees with :func:`eta_t`.
    """
    _check_t(t)

    def func(u):
        return c_t(imm.eval(u), t)

    def d1(u):
        p = imm.eval(u)
        return dc_t(p[:, None, :], imm.first_derivatives(u), t)

    out = ParametricImmersion(
        n=imm.n, lower=imm.lower, upper=imm.upper, periodic=imm.periodic,
        func=func, d1=d1, d2=None, orientation_sign=1, topology=imm.topology,
        chi=imm.chi, collapsed=imm.collapsed, h_fd1=imm.h_fd1, h_fd2=imm.h_fd2,
        name=f"C_{t}({imm.name})", params=dict(imm.params, t=t))
    ref = (0.5 * (imm.lower + imm.upper) + 0.1)[None]
    base_eta = unit_normal(imm, ref)
    if float(unit_normal(out, ref)[0] @ eta_t(imm.eval(ref), base_eta, t)[0]) < 0:
        out = out.with_orientation(-1)
    return out


# ---------------------------------------------------------------------------


@dataclasses.dataclass
class StageResult:
    stage: int
    name: str
    passed: bool
    detail: dict
    error: str = ""


@dataclasses.dataclass
class XiaReport:
    stages: list
    t_star: float = float("nan")
    min_abs_mu: float = float("nan")
    certificate: dict = None

    @property
    def certified(self):
        return bool(self.stages) and all(s.passed for s in self.stages) and len(self.stages) == 6

    @property
    def failure(self):
        for s in self.stages:
            if not s.passed:
                return s
        return None

    def raise_for_failure(self):
        errs = {c.__name__: c for c in (GKVanishes, NotInHemisphere,
                                        MixedCurvatureSigns, NoAdmissibleT)}
        f = self.failure
        if f is not None:
            raise errs.get(f.error, GeometryError)(f"stage {f.stage} ({f.name}) failed")

    def to_dict(self):
        f = self.failure
        return {
            "certified": self.certified,
            "failure_stage": None if f is None else f.stage,
            "failure": None if f is None else f.error,
            "t_star": self.t_star,
            "min_abs_mu": self.min_abs_mu,
            "stages": [dataclasses.asdict(s) for s in self.stages],
            "certificate": self.certificate,
        }


def _min_abs_mu(imm, grid, t):
    try:
        mu = curvature.principal_curvatures(image_immersion(imm, t), grid.nodes)
    except GeometryError:
        return -np.inf, None
    return float(np.abs(mu).min()), mu


def xia_certify(imm, grid, margin=1e-3, delta=rigidity.DEFAULT_DELTA, iterations=60,
                t_min=1e-4, seed=0):
    """Hemisphere + nonvanishing Gauss-Kronecker pipeline; see module docstring.

    Stages: (1) ``min |det A| > margin``; (2) the surface fits in an open
    hemisphere, rotated to be centred at p0; (3) principal curvatures share
    one sign everywhere; (4) bisection on log t for the largest
    ``t in (0, 1/sqrt2)`` with ``min |mu| > 1 + margin`` on ``C_t(M)``;
    (5) ``mu_j >= (K/t) lambda_j`` at the nodes; (6) the rigidity certificate
    on ``C_t(M)`` with the hemisphere cap ``R = pi/2``.
    """
    if imm.n < 2:
        raise DomainError("n must be >= 2")
    stages = []
    u = grid.nodes
    dim = imm.ambient_dim
    north = sphere.basis_vector(dim - 1, dim)

    gk = curvature.gauss_kronecker(imm, u)
    gk_min = float(np.abs(gk).min())
    stages.append(StageResult(1, "gauss_kronecker", gk_min > margin,
                              {"min_abs_gk": gk_min, "margin": margin},
                              "" if gk_min > margin else "GKVanishes"))

    work = imm
    try:
        cap = rigidity.enclosing_cap(imm.eval(u), seed)
        rot = sphere.rotation_to(cap.center, north)
        work = rotated(imm, rot)
        consts = hemisphere_constants(work, grid)
        stages.append(StageResult(2, "hemisphere", True, {
            "cap_center": cap.center.tolist(), "cap_radius": cap.radius,
            "h": consts.h, "eps": consts.eps}))
    except (DegenerateConfiguration, NotInHemisphere) as exc:
        consts = None
        stages.append(StageResult(2, "hemisphere", False, {"reason": str(exc)},
                                  "NotInHemisphere"))

    lam = curvature.principal_curvatures(work, u)
    all_pos, all_neg = bool(np.all(lam > 0)), bool(np.all(lam < 0))
    stages.append(StageResult(3, "curvature_signs", all_pos or all_neg, {
        "min_lambda": float(lam.min()), "max_lambda": float(lam.max()),
        "flipped_orientation": all_neg},
        "" if (all_pos or all_neg) else "MixedCurvatureSigns"))
    if not all(s.passed for s in stages):
        return XiaReport(stages)
    if all_neg:
        work = work.flipped()
        lam = -lam[:, ::-1]

    t_hi = T_MAX * (1.0 - 1e-12)
    ok_lo, _ = _min_abs_mu(work, grid, t_min)
    if not ok_lo > 1.0 + margin:
        stages.append(StageResult(4, "shrink_search", False,
                                  {"t_min": t_min, "min_abs_mu": ok_lo}, "NoAdmissibleT"))
        return XiaReport(stages)
    val_hi, _ = _min_abs_mu(work, grid, t_hi)
    if val_hi > 1.0 + margin:
        t_star = t_hi
    else:
        lo, hi = math.log(t_min), math.log(t_hi)
        for _ in range(iterations):
            mid = 0.5 * (lo + hi)
            if _min_abs_mu(work, grid, math.exp(mid))[0] > 1.0 + margin:
                lo = mid
            else:
                hi = mid
        t_star = math.exp(lo)
    min_mu, mu = _min_abs_mu(work, grid, t_star)
    stages.append(StageResult(4, "shrink_search", True, {
        "t_star": t_star, "min_abs_mu": min_mu, "threshold": 1.0 + margin,
        "iterations": iterations}))

    K = k_bound(consts.h)
    slack = float((mu - (K / t_star) * lam).min())
    stages.append(StageResult(5, "mu_lower_bound", slack >= -1e-6, {
        "K": K, "lambda_min": float(lam.min()), "min_slack": slack},
        "" if slack >= -1e-6 else "MuBoundViolated"))

    hemi = rigidity.CapResult(north, math.pi / 2, "hemisphere", "fixed")
    cert = rigidity.certify_sphere(image_immersion(work, t_star), grid, delta, cap=hemi)
    stages.append(StageResult(6, "rigidity_certificate", cert.certified,
                              {"verdict": cert.verdict}, "" if cert.certified else "CertificateFailed"))
    return XiaReport(stages, t_star, min_mu, cert.to_dict())
