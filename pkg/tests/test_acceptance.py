"""Acceptance suite: one test and one printed PASS/FAIL line per criterion."""
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from transgauss import beltrami as B, cli, curvature as C, gauss_bonnet as GB, rigidity as R, sphere
from transgauss.structures import ParallelTransportStructure, QuaternionStructure
from transgauss.surfaces import make_clifford, make_geodesic_sphere, make_grid, make_perturbed_sphere

from conftest import E4, SQRT1_2, interior_points, random_sphere, random_tangent, record

E1 = sphere.basis_vector(0, 4)


def timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def test_criterion_1_gauss_bonnet():
    cap = make_geodesic_sphere(E4, 0.5)
    torus = make_clifford(2, 0.6)
    rep_s, t_s = timed(lambda: GB.gauss_bonnet_check(ParallelTransportStructure(E4), cap, make_grid(cap, 128)))
    rep_t, t_t = timed(lambda: GB.gauss_bonnet_check(ParallelTransportStructure(E1), torus, make_grid(torus, 128)))
    ok = (abs(rep_s.integral - 4 * math.pi) < 1e-5 and abs(rep_t.integral) < 1e-6
          and t_s < 10 and t_t < 10)
    assert record(1, ok, f"sphere |int-4pi|={abs(rep_s.integral - 4 * math.pi):.2e} ({t_s:.1f}s), "
                         f"torus |int|={abs(rep_t.integral):.2e} ({t_t:.1f}s)")


def test_criterion_2_derivative_identity():
    imm = make_perturbed_sphere(E4, 0.5, 0.05, 3)
    grid = make_grid(imm, 64)
    res = {}
    t0 = time.perf_counter()
    for name, s in (("parallel", ParallelTransportStructure(E4)), ("quaternion", QuaternionStructure())):
        res[name] = float(C.sample_surface(s, imm, grid.nodes).prop_residual.max())
    dt = time.perf_counter() - t0
    ok = max(res.values()) < 1e-5 and dt < 30
    assert record(2, ok, f"max residual parallel={res['parallel']:.2e} "
                         f"quaternion={res['quaternion']:.2e} ({dt:.1f}s)")


def test_criterion_3_closed_forms_vs_oracles():
    rng = np.random.default_rng(2024)
    p, q = random_sphere(rng, 100), random_sphere(rng, 100)
    flip = 1 + np.sum(p * q, axis=1) < 1e-2
    q[flip] *= -1.0  # keep all 100 pairs well away from antipodal
    v = random_tangent(rng, p)
    err_t = float(np.abs(sphere.parallel_transport(p, q, v)
                         - sphere.parallel_transport_ode(p, q, v, steps=10_000)).max())

    s = ParallelTransportStructure(E1)
    torus = make_clifford(2, 0.6)
    u = interior_points(torus, rng, 20)
    alpha = C.invariant_shape_operator(s, torus, u)
    err_a = float(np.abs(alpha - C.c_function(E1, torus, u)[:, None, None] * np.eye(2)).max())

    bumpy = make_perturbed_sphere(E4, 0.5, 0.05, 3)
    sp = ParallelTransportStructure(E4)
    lf = C.local_frame(bumpy, make_grid(bumpy, 32).nodes)
    c = (lf.eta @ E4) / (1 + lf.p @ E4)
    closed = (-c[:, None] * (lf.p + E4) + lf.eta) @ sp.basis.T
    gam = C.gauss_map(sp, bumpy, lf.u, lf)
    err_g = float(np.abs(gam - closed).max())
    # independent composition: transport eta to p0 with the RK4 oracle
    pick = rng.choice(len(lf.p), 200, replace=False)
    ode = sphere.parallel_transport_ode(lf.p[pick], np.broadcast_to(E4, (200, 4)), lf.eta[pick],
                                        steps=10_000) @ sp.basis.T
    err_o = float(np.abs(ode - closed[pick]).max())
    ok = err_t < 1e-8 and err_a < 1e-6 and err_g < 1e-10 and err_o < 1e-10
    assert record(3, ok, f"transport vs RK4 {err_t:.2e}, alpha vs c*Id {err_a:.2e}, "
                         f"gamma vs closed form {err_g:.2e} (RK4 composition {err_o:.2e})")


def test_criterion_4_lemma_radius():
    closed = R.lemma_radius_clifford(0.6)
    imm = make_clifford(2, 0.6)
    cap = R.largest_empty_cap(imm.eval(make_grid(imm, 256).nodes), seed=0)
    diff = abs(cap.radius - closed)
    ok = closed == pytest.approx(math.acos(0.6), abs=1e-15) and diff < 2e-3
    assert record(4, ok, f"closed form {closed:.7f}, minimax oracle {cap.radius:.7f}, diff {diff:.1e}")


def test_criterion_5_sphere_certificate():
    cap = make_geodesic_sphere(E4, 0.5)
    rep = R.certify_sphere(cap, make_grid(cap, 64))
    expect = 1 / math.tan(0.5) - math.tan(0.25)
    torus = make_clifford(2, SQRT1_2)
    rep_t = R.certify_sphere(torus, make_grid(torus, 64), convention="enclosing")
    ok = rep.certified and abs(rep.min_margin_curvature - expect) < 1e-6 and not rep_t.certified
    assert record(5, ok, f"sphere margin {rep.min_margin_curvature:.7f} (expected {expect:.7f}), "
                         f"torus verdict under enclosing cap: {rep_t.verdict}")


def test_criterion_6_counterexample_family(tmp_path):
    codes, margins = {}, {}
    for eps in (0.05, 0.1, 0.2, 0.3, 0.4):
        out = tmp_path / f"ce_{eps}.json"
        codes[eps] = cli.main(["counterexample", "--epsilon", str(eps), "--out", str(out)])
        rep = __import__("json").loads(out.read_text())["report"]
        margins[eps] = (rep["min_margin"], rep["chi"])
    rejected = cli.main(["counterexample", "--epsilon", "0.45", "--out", str(tmp_path / "x.json")])
    ok = (all(c == 0 for c in codes.values()) and all(m > 0 and chi == 0 for m, chi in margins.values())
          and rejected == 2)
    worst = min(m for m, _ in margins.values())
    assert record(6, ok, f"exit codes {sorted(set(codes.values()))}, smallest margin {worst:.4f}, "
                         f"eps=0.45 exit {rejected}")


def test_criterion_7_shrinking_machinery():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    p = random_sphere(rng, 200)
    p[:, -1] = np.abs(p[:, -1]) + 0.05
    p /= np.linalg.norm(p, axis=1, keepdims=True)
    v = random_tangent(rng, p)
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    eta = random_tangent(rng, p)
    eta -= np.sum(eta * v, axis=1, keepdims=True) * v
    eta /= np.linalg.norm(eta, axis=1, keepdims=True)
    err_f1 = float(np.abs(B.f_factor(p, v, eta, 1.0) - 1).max())
    v0, e0 = np.array([0.6, 0.8, 0.0, 0.0]), np.array([0.0, 0.0, 1.0, 0.0])
    err_p0 = max(abs(B.f_factor(E4, v0, e0, t) - 1 / t) for t in (0.1, 0.3, 0.5, 0.7))

    # F_t >= K/t on the samples of two hemisphere surfaces
    slack = np.inf
    for imm in (make_geodesic_sphere(E4, 0.5), make_perturbed_sphere(E4, 1.0, 0.05, 3)):
        grid = make_grid(imm, 32)
        K = B.k_bound(B.hemisphere_constants(imm, grid).h)
        lf = C.local_frame(imm, grid.nodes)
        for t in (0.1, 0.3, 0.5):
            for _ in range(4):
                w = np.einsum("ni,nid->nd", rng.standard_normal((grid.size, 2)), lf.frame)
                w /= np.linalg.norm(w, axis=1, keepdims=True)
                slack = min(slack, float((B.f_factor(lf.p, w, lf.eta, t) - K / t).min()))

    # F_t relation against the curvature engine applied to C_t o f
    bumpy = make_perturbed_sphere(E4, 0.5, 0.05, 3)
    t = 0.4
    img = B.image_immersion(bumpy, t)
    u = interior_points(bumpy, rng, 20)
    a = rng.standard_normal((20, 2))
    lf, lfi = C.local_frame(bumpy, u), C.local_frame(img, u)
    hess = np.einsum("nijd,nd->nij", bumpy.second_derivatives(u), lf.eta)
    hess_t = np.einsum("nijd,nd->nij", img.second_derivatives(u), lfi.eta)
    vv = np.einsum("ni,nid->nd", a, lf.frame)
    nv = np.linalg.norm(vv, axis=1)
    ww = np.einsum("ni,nid->nd", a, lfi.frame)
    ii = np.einsum("ni,nij,nj->n", a, hess, a) / nv**2
    ii_t = np.einsum("ni,nij,nj->n", a, hess_t, a) / np.sum(ww * ww, axis=1)
    err_rel = float(np.abs(ii_t - B.f_factor(lf.p, vv / nv[:, None], lf.eta, t) * ii).max())

    xia = {}
    for name, imm in (("sphere rho=1.2", make_geodesic_sphere(E4, 1.2)),
                      ("perturbed rho=1.0", make_perturbed_sphere(E4, 1.0, 0.05, 3))):
        rep = B.xia_certify(imm, make_grid(imm, 32))
        xia[name] = rep
    dt = time.perf_counter() - t0
    ok = (err_f1 < 1e-12 and err_p0 < 1e-12 and slack >= 0 and err_rel < 1e-5
          and all(r.certified and r.min_abs_mu > 1.001 for r in xia.values()) and dt < 60)
    summary = ", ".join(f"{k}: t*={r.t_star:.4f} min|mu|={r.min_abs_mu:.6f}" for k, r in xia.items())
    assert record(7, ok, f"|F_1-1|={err_f1:.1e}, |F_t(p0)-1/t|={err_p0:.1e}, "
                         f"min(F_t-K/t)={slack:.3e}, F_t relation {err_rel:.1e}; {summary} ({dt:.1f}s)")


def test_criterion_8_degree_consistency():
    cap = make_geodesic_sphere(E4, 0.5)
    bumpy = make_perturbed_sphere(E4, 0.5, 0.05, 3)
    torus = make_clifford(2, 0.6)
    cases = [("sphere/parallel", cap, ParallelTransportStructure(E4)),
             ("sphere/quaternion", cap, QuaternionStructure()),
             ("perturbed/parallel", bumpy, ParallelTransportStructure(E4)),
             ("perturbed/quaternion", bumpy, QuaternionStructure()),
             ("torus/parallel", torus, ParallelTransportStructure(E1)),
             ("torus/quaternion", torus, QuaternionStructure())]
    found = []
    for name, imm, s in cases:
        grid = make_grid(imm, 32)
        deg = GB.degree_by_preimage(s, imm, grid, seed=0)
        est = GB.gauss_bonnet_check(s, imm, grid).degree_estimate
        found.append((name, deg, round(est)))
    ok = all(d == e for _, d, e in found)
    assert record(8, ok, "; ".join(f"{n} {d}/{e}" for n, d, e in found))


def test_criterion_9_determinism(tmp_path):
    configs = {
        "report": '{"surface": {"family": "perturbed_sphere"}, "grid": {"nodes": 12}}',
        "gauss-bonnet": '{"surface": {"family": "clifford", "params": {"r": 0.6}}, "grid": {"nodes": 16}}',
        "certify": '{"surface": {"family": "geodesic_sphere"}, "grid": {"nodes": 16}}',
        "counterexample": '{"grid": {"nodes": 16}}',
        "xia": '{"surface": {"family": "geodesic_sphere", "params": {"rho": 1.2}}, "grid": {"nodes": 12}}',
    }
    same = {}
    for cmd, text in configs.items():
        cfg = tmp_path / f"{cmd}.json"
        cfg.write_text(text)
        outs = []
        for _ in range(2):
            args = [sys.executable, "-m", "transgauss", cmd, "--config", str(cfg)]
            if cmd == "counterexample":
                args += ["--epsilon", "0.2"]
            outs.append(subprocess.run(args, capture_output=True, check=False).stdout)
        same[cmd] = outs[0] == outs[1] and len(outs[0]) > 0
    ok = all(same.values())
    assert record(9, ok, ", ".join(f"{k}={'identical' if v else 'DIFFERENT'}" for k, v in same.items()))
