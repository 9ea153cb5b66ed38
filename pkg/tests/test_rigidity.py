import math

import numpy as np
import pytest

from transgauss import rigidity as R, sphere
from transgauss.errors import DegenerateConfiguration, DomainError
from transgauss.surfaces import make_clifford, make_geodesic_sphere, make_grid

from conftest import E4, SQRT1_2, random_sphere

E1, E2 = sphere.basis_vector(0, 4), sphere.basis_vector(1, 4)


def test_enclosing_cap_small_cases():
    cap = R.enclosing_cap(E1[None])
    np.testing.assert_allclose(cap.center, E1)
    assert cap.radius == pytest.approx(0.0, abs=1e-12)
    cap = R.enclosing_cap(np.vstack([E1, E2]))
    np.testing.assert_allclose(cap.center, (E1 + E2) / math.sqrt(2), atol=1e-12)
    assert cap.radius == pytest.approx(math.pi / 4, abs=1e-12)


def test_enclosing_cap_of_geodesic_sphere(rng):
    p0 = random_sphere(rng, 1)[0]
    imm = make_geodesic_sphere(p0, 0.7)
    cap = R.enclosing_cap(imm.eval(make_grid(imm, 24).nodes))
    assert np.abs(cap.center - p0).max() < 1e-6
    assert abs(cap.radius - 0.7) < 1e-6


def test_welzl_matches_convex_program(rng):
    cp = pytest.importorskip("cvxpy")
    for d in (2, 3, 5):
        pts = rng.standard_normal((40, d))
        c, r = R.smallest_enclosing_ball(pts, seed=3)
        x, t = cp.Variable(d), cp.Variable()
        cp.Problem(cp.Minimize(t), [cp.norm(pts[i] - x) <= t for i in range(len(pts))]).solve()
        assert r == pytest.approx(t.value, abs=1e-6)
        assert np.abs(c - x.value).max() < 1e-4
        assert np.all(np.linalg.norm(pts - c, axis=1) <= r + 1e-9)


def test_enclosing_cap_rejects_non_hemispherical(torus):
    with pytest.raises(DegenerateConfiguration):
        R.enclosing_cap(torus.eval(make_grid(torus, 16).nodes))


def test_lemma_radius_closed_forms():
    assert R.lemma_radius_clifford(0.6) == pytest.approx(math.acos(0.6))
    assert R.lemma_radius_clifford(0.6) == pytest.approx(0.9272952, abs=1e-7)
    assert R.lemma_radius_clifford(SQRT1_2) == pytest.approx(math.pi / 4)
    with pytest.raises(DomainError):
        R.lemma_radius_clifford(1.2)


def test_lemma_radius_vs_minimax_oracle():
    imm = make_clifford(2, 0.6)
    samples = imm.eval(make_grid(imm, 128).nodes)
    cap = R.largest_empty_cap(samples, seed=0)
    assert abs(cap.radius - math.acos(0.6)) < 2e-3
    # the cap really misses the samples
    assert (samples @ cap.center).max() <= math.cos(cap.radius) + 1e-12


def test_clifford_principal_curvatures(rng):
    assert R.clifford_principal_curvatures(SQRT1_2) == pytest.approx((-1.0, 1.0))
    assert R.clifford_principal_curvatures(0.5) == pytest.approx((-1.7320508, 0.5773503), abs=1e-7)
    from transgauss.curvature import principal_curvatures
    imm = make_clifford(2, 0.3)
    u = rng.random((20, 2)) * 2 * math.pi
    lam = principal_curvatures(imm, u)
    assert np.abs(lam - np.array(R.clifford_principal_curvatures(0.3))).max() < 1e-8


@pytest.mark.parametrize("rho", [0.3, 0.5, 1.0])
def test_geodesic_spheres_are_certified(rho):
    imm = make_geodesic_sphere(E4, rho)
    rep = R.certify_sphere(imm, make_grid(imm, 32))
    assert rep.certified and rep.convention == R.ENCLOSING
    expect = 1 / math.tan(rho) - math.tan(rho / 2)
    assert rep.min_margin_curvature == pytest.approx(expect, abs=1e-6)
    assert rep.min_margin_invertibility > 0


def test_example_margin_values():
    imm = make_geodesic_sphere(E4, 0.5)
    rep = R.certify_sphere(imm, make_grid(imm, 32))
    assert rep.R == pytest.approx(0.5, abs=1e-9)
    assert rep.tan_half_R == pytest.approx(0.2553419, abs=1e-7)
    assert rep.min_abs_curvature == pytest.approx(1.8304877, abs=1e-7)
    assert rep.min_margin_curvature == pytest.approx(1.575, abs=1e-3)


def test_great_sphere_fails():
    imm = make_geodesic_sphere(E4, math.pi / 2)
    cap = R.CapResult(E4, math.pi / 2, "given", "fixed")
    assert not R.certify_sphere(imm, make_grid(imm, 16), cap=cap).certified


@pytest.mark.parametrize("convention", ["enclosing", "lemma"])
def test_clifford_torus_is_not_certified(convention):
    imm = make_clifford(2, SQRT1_2)
    rep = R.certify_sphere(imm, make_grid(imm, 32), convention=convention)
    assert not rep.certified
    assert rep.convention == R.CONVENTIONS[convention]


def test_delta_monotonicity():
    imm = make_geodesic_sphere(E4, 0.5)
    grid = make_grid(imm, 16)
    verdicts = [R.certify_sphere(imm, grid, delta=d).certified for d in (0.0, 1e-6, 0.5, 1.0, 1.6, 3.0)]
    assert verdicts == sorted(verdicts, reverse=True)
    assert verdicts[0] and not verdicts[-1]


def test_counterexample_closed_values():
    lo, hi = R.j_interval(0.2)
    assert (lo, hi) == pytest.approx((0.25, 0.8333333333))
    rep = R.counterexample_family(0.2, scan=False)
    assert rep.intersection == pytest.approx((0.25, SQRT1_2))
    assert rep.r == pytest.approx(0.4785534, abs=1e-7)
    # r = 0.5 example: eps tan(R/2) = 0.2 tan(pi/6)
    assert 0.2 * math.tan(R.lemma_radius_clifford(0.5) / 2) == pytest.approx(0.1154701, abs=1e-7)


@pytest.mark.parametrize("eps", [0.05, 0.1, 0.2, 0.3, 0.4, 0.41])
def test_counterexample_family(eps):
    rep = R.counterexample_family(eps, scan=False)
    assert rep.passed and rep.chi == 0 and min(rep.margins) > 0


def test_counterexample_rejects_out_of_range():
    for eps in (0.0, 0.45, -0.1):
        with pytest.raises(DomainError):
            R.counterexample_family(eps)


def test_admissible_lower_endpoint():
    lo, hi = R.admissible_interval(0.2)
    assert lo == pytest.approx(0.2 / 1.2, abs=5e-4)
    assert hi == pytest.approx(SQRT1_2)
