"""Sphere-diffeomorphism certificates and the Clifford counterexample family.

Two cap conventions appear: the smallest cap *containing* the surface
(``"enclosing"``) and the largest open cap *missing* it (``"lemma"``).  For a
closed sample set they are complementary: the enclosing cap about ``-u`` has
radius ``pi - R`` when the empty cap about ``u`` has radius ``R``.
"""
import dataclasses
import math

import numpy as np
from scipy.optimize import minimize

from . import _kernels, curvature, sphere
from .errors import (DegenerateConfiguration, DomainError, EmptyIntersection,
                     OutOfDomain)
from .surfaces import make_clifford, make_grid

ENCLOSING = "enclosing_cap"
LEMMA = "lemma_empty_ball"
CONVENTIONS = {"enclosing": ENCLOSING, "lemma": LEMMA,
               ENCLOSING: ENCLOSING, LEMMA: LEMMA}
DEFAULT_DELTA = 1e-6
SAMPLED_NOTE = "sampled, not a proof"


@dataclasses.dataclass
class CapResult:
    center: np.ndarray
    radius: float
    convention: str
    method: str = ""

    def contains(self, pts, slack=1e-9):
        return np.all(sphere.geodesic_distance(pts, self.center) <= self.radius + slack)


# ---------------------------------------------------------------------------
# Welzl / move-to-front smallest enclosing ball in R^d


def _ball_through(support):
    if not support:
        return None, -1.0
    s0 = support[0]
    if len(support) == 1:
        return s0.copy(), 0.0
    q = np.array([s - s0 for s in support[1:]])
    gram = q @ q.T
    rhs = 0.5 * np.diag(gram)
    try:
        lam = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        lam = np.linalg.lstsq(gram, rhs, rcond=None)[0]
    c = s0 + lam @ q
    return c, float(np.sum((c - s0) ** 2))


def _outside(p, c, r2):
    if c is None:
        return True
    return float(np.sum((p - c) ** 2)) > r2 * (1.0 + 1e-12) + 1e-24


def _mtf(pts, end, support, dim):
    c, r2 = _ball_through(support)
    if len(support) == dim + 1:
        return c, r2
    i = 0
    while i < end:
        p = pts[i]
        if _outside(p, c, r2):
            c, r2 = _mtf(pts, i, support + [p], dim)
            pts.insert(0, pts.pop(i))
        i += 1
    return c, r2


def smallest_enclosing_ball(points, seed=0):
    """Euclidean smallest enclosing ball ``(center, radius)`` by move-to-front Welzl."""
    points = np.asarray(points, dtype=float)
    order = np.random.default_rng(seed).permutation(points.shape[0])
    # duplicates only slow the scan down
    uniq = np.unique(np.round(points[order], 15), axis=0, return_index=True)[1]
    pts = [points[order][k] for k in np.sort(uniq)]
    c, r2 = _mtf(pts, len(pts), [], points.shape[1])
    return c, math.sqrt(max(r2, 0.0))


def enclosing_cap(samples, seed=0):
    """Smallest spherical cap containing ``samples`` (rows on the unit sphere).

    The Euclidean SEB centre, normalised, is the cap centre; the radius is the
    largest geodesic distance to a sample.  Raises
    :class:`DegenerateConfiguration` when no cap smaller than a hemisphere exists.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if samples.shape[0] == 0:
        raise DomainError("need at least one sample")
    c, _ = smallest_enclosing_ball(samples, seed)
    norm = np.linalg.norm(c)
    if norm < 1e-9:
        raise DegenerateConfiguration("enclosing ball centred at the origin")
    center = c / norm
    radius = float(sphere.geodesic_distance(samples, center).max())
    if radius >= math.pi / 2:
        raise DegenerateConfiguration("samples are not contained in an open hemisphere")
    return CapResult(center, radius, ENCLOSING, "welzl")


def random_sphere_points(count, dim, rng):
    x = rng.standard_normal((count, dim))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def largest_empty_cap(samples, n_centers=10_000, seed=0, refine=8):
    """Largest open cap missing ``samples``: brute-force minimax over random centres.

    The best ``refine`` centres are polished by Nelder-Mead in tangent
    coordinates.  The objective is ``max_q <p, q>``, so the radius is its arccos.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    dim = samples.shape[1]
    rng = np.random.default_rng(seed)
    centers = random_sphere_points(n_centers, dim, rng)
    score = _kernels.max_dot(centers, samples)
    best = np.argsort(score, kind="stable")[:max(refine, 1)]
    best_c, best_s = centers[best[0]], score[best[0]]
    for k in best[:refine]:
        base = centers[k]
        tb = sphere.orthonormal_complement(base)

        def obj(t, base=base, tb=tb):
            p = sphere.exp_map(base, t @ tb)
            return float(_kernels.max_dot(p[None], samples)[0])

        res = minimize(obj, np.zeros(dim - 1), method="Nelder-Mead",
                       options={"xatol": 1e-9, "fatol": 1e-13, "maxiter": 4000})
        if res.fun < best_s:
            best_s = res.fun
            best_c = sphere.exp_map(base, res.x @ tb)
    best_c = best_c / np.linalg.norm(best_c)
    return CapResult(best_c, float(np.arccos(np.clip(best_s, -1.0, 1.0))), LEMMA, "minimax")


def complement_cap(cap):
    """The cap about ``-center`` with radius ``pi - radius`` (switches convention)."""
    other = LEMMA if cap.convention == ENCLOSING else ENCLOSING
    return CapResult(-cap.center, math.pi - cap.radius, other, "complement:" + cap.method)


def cap_for_convention(samples, convention, seed=0):
    convention = CONVENTIONS[convention]
    if convention == LEMMA:
        return largest_empty_cap(samples, seed=seed)
    try:
        return enclosing_cap(samples, seed)
    except DegenerateConfiguration:
        return complement_cap(largest_empty_cap(samples, seed=seed))


# ---------------------------------------------------------------------------
# closed forms for M_r


def lemma_radius_clifford(r):
    """``arccos(min(r, sqrt(1 - r^2)))``."""
    if not 0.0 < r < 1.0:
        raise DomainError("r must lie in (0, 1)")
    return math.acos(min(r, math.sqrt(1.0 - r * r)))


def clifford_principal_curvatures(r, n=2):
    """``(-sqrt(1-r^2)/r, r/sqrt(1-r^2))``; the second has multiplicity n - 1."""
    if not 0.0 < r < 1.0:
        raise DomainError("r must lie in (0, 1)")
    s = math.sqrt(1.0 - r * r)
    return -s / r, r / s


# ---------------------------------------------------------------------------


@dataclasses.dataclass
class CertificateReport:
    verdict: str
    R: float
    convention: str
    center: np.ndarray
    cap_method: str
    delta: float
    min_abs_curvature: float
    tan_half_R: float
    min_margin_curvature: float
    min_margin_invertibility: float
    worst_u_curvature: np.ndarray
    worst_u_invertibility: np.ndarray
    note: str = SAMPLED_NOTE

    @property
    def certified(self):
        return self.verdict == "certified"

    def to_dict(self):
        return {
            "verdict": self.verdict, "R": self.R, "convention": self.convention,
            "center": self.center.tolist(), "cap_method": self.cap_method,
            "delta": self.delta, "min_abs_curvature": self.min_abs_curvature,
            "tan_half_R": self.tan_half_R,
            "min_margin_curvature": self.min_margin_curvature,
            "min_margin_invertibility": self.min_margin_invertibility,
            "worst_u_curvature": self.worst_u_curvature.tolist(),
            "worst_u_invertibility": self.worst_u_invertibility.tolist(),
            "note": self.note,
        }


def _bracketed_min_abs(vals, grid, periodic):
    """Per-node ``min_i |vals_i|``, set to 0 where ``vals_i`` changes sign
    towards a grid neighbour (a zero lies on that edge by continuity)."""
    out = np.abs(vals).min(axis=1)
    field = vals.reshape(grid.shape + (vals.shape[1],))
    flat = out.reshape(grid.shape)
    for ax, per in enumerate(periodic):
        nb = np.roll(field, -1, axis=ax)
        change = np.any(np.sign(field) * np.sign(nb) < 0, axis=-1)
        if not per:
            idx = [slice(None)] * change.ndim
            idx[ax] = -1
            change[tuple(idx)] = False
        flat = np.where(change, 0.0, flat)
    return flat.ravel()


def certify_sphere(imm, grid, delta=DEFAULT_DELTA, convention="enclosing", cap=None, seed=0):
    """Check ``|lambda_i| > tan(R/2)`` and ``lambda_i + c != 0`` at every grid node.

    ``p0`` is the cap centre.  Certified iff both margins exceed ``delta``.
    A sign change of ``lambda_i`` or ``lambda_i + c`` between neighbouring
    nodes counts as a zero margin.
    A precomputed ``cap`` overrides the convention.
    """
    if imm.n < 2:
        raise DomainError("n must be >= 2")
    u = grid.nodes
    lf = curvature.local_frame(imm, u)
    if cap is None:
        cap = cap_for_convention(lf.p, convention, seed)
    p0 = cap.center
    if np.any(1.0 + lf.p @ p0 <= sphere.ANTIPODAL_TOL):
        raise OutOfDomain("surface meets the antipode of the cap centre")
    lam = curvature.principal_curvatures(imm, u, lf)
    c = curvature.c_function(p0, imm, u, lf)
    t = math.tan(cap.radius / 2.0)
    abs_lam = _bracketed_min_abs(lam, grid, imm.periodic)
    inv = _bracketed_min_abs(lam + c[:, None], grid, imm.periodic)
    m_curv = float(abs_lam.min() - t)
    m_inv = float(inv.min())
    ok = m_curv > delta and m_inv > delta
    return CertificateReport(
        verdict="certified" if ok else "failed", R=float(cap.radius),
        convention=cap.convention, center=np.asarray(p0), cap_method=cap.method,
        delta=float(delta), min_abs_curvature=float(abs_lam.min()), tan_half_R=t,
        min_margin_curvature=m_curv, min_margin_invertibility=m_inv,
        worst_u_curvature=u[int(np.argmin(abs_lam))],
        worst_u_invertibility=u[int(np.argmin(inv))],
    )


# ---------------------------------------------------------------------------

EPS_MAX = math.sqrt(2.0) - 1.0


def j_interval(eps):
    return eps / (1.0 - eps), 1.0 / (1.0 + eps)


def admissible_interval(eps, n=2, count=2000):
    """Empirical sub-interval of ``(0, 1/sqrt2]`` where the epsilon-inequality holds.

    Scans r, evaluating principal curvatures with the curvature engine at one
    chart point (they are constant on M_r) and R the empty-cap radius.
    """
    rs = np.linspace(1e-3, 1.0 / math.sqrt(2.0), count)
    ok = np.zeros(count, dtype=bool)
    u0 = np.full(n, 0.7)
    for k, r in enumerate(rs):
        lam = curvature.principal_curvatures(make_clifford(n, float(r)), u0)
        ok[k] = np.abs(lam).min() > eps * math.tan(lemma_radius_clifford(float(r)) / 2.0)
    if not ok.any():
        return None
    idx = np.flatnonzero(ok)
    return float(rs[idx[0]]), float(rs[idx[-1]])


@dataclasses.dataclass
class CounterexampleReport:
    epsilon: float
    n: int
    r: float
    I: tuple
    J: tuple
    intersection: tuple
    R: float
    bound: float
    margins: list
    min_margin: float
    chi: int
    R_enclosing: float
    min_margin_enclosing: float
    closed_form_lower: float
    empirical_interval: tuple
    nodes: int

    @property
    def passed(self):
        return self.min_margin > 0 and self.chi == 0

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["passed"] = self.passed
        d["convention"] = LEMMA
        d["note"] = SAMPLED_NOTE
        return d


def counterexample_family(eps, n=2, nodes=64, scan=True):
    """Build ``M_r`` with r the midpoint of ``(0, 1/sqrt2] & J_eps`` and check
    ``|lambda_i| > eps tan(R/2)`` at every grid node, R = arccos min(r, s)."""
    if not 0.0 < eps < EPS_MAX:
        raise DomainError(f"epsilon must lie in (0, {EPS_MAX:.10f})")
    i_lo, i_hi = 0.0, 1.0 / math.sqrt(2.0)
    j_lo, j_hi = j_interval(eps)
    lo, hi = max(i_lo, j_lo), min(i_hi, j_hi)
    if lo >= hi:
        raise EmptyIntersection("I and J_eps do not meet")
    r = 0.5 * (lo + hi)
    imm = make_clifford(n, r)
    grid = make_grid(imm, nodes)
    lam = curvature.principal_curvatures(imm, grid.nodes)
    R = lemma_radius_clifford(r)
    bound = eps * math.tan(R / 2.0)
    margins = (np.abs(lam).min(axis=0) - bound).tolist()
    R_enc = math.pi - R
    return CounterexampleReport(
        epsilon=eps, n=n, r=r, I=(i_lo, i_hi), J=(j_lo, j_hi), intersection=(lo, hi),
        R=R, bound=bound, margins=margins, min_margin=float(min(margins)),
        chi=int(imm.chi), R_enclosing=R_enc,
        min_margin_enclosing=float(np.abs(lam).min() - eps * math.tan(R_enc / 2.0)),
        closed_form_lower=eps / (1.0 + eps),
        empirical_interval=admissible_interval(eps, n) if scan else None,
        nodes=nodes,
    )
