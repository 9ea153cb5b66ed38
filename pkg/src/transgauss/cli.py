"""Command-line front end.

Exit codes: 0 success or certified, 1 check failed, 2 invalid input,
3 runtime geometry error.  Reports are JSON with sorted keys and echo the
resolved configuration, so identical inputs give byte-identical output.
"""
import argparse
import copy
import csv
import io
import json
import math
import sys
from importlib import resources

import jsonschema
import numpy as np

from . import beltrami, curvature, gauss_bonnet, rigidity, sphere
from .errors import GeometryError
from .structures import FrameStructure, ParallelTransportStructure, QuaternionStructure
from .surfaces import make_clifford, make_geodesic_sphere, make_grid, make_perturbed_sphere

EXIT_OK, EXIT_FAILED, EXIT_INPUT, EXIT_GEOMETRY = 0, 1, 2, 3

DEFAULTS = {
    "surface": {"family": "geodesic_sphere", "n": 2, "params": {}},
    "structure": {"kind": "parallel", "base_point": None},
    "grid": {"nodes": 64, "rule": "auto"},
    "numerics": {"h_fd": curvature.H_FD, "delta": rigidity.DEFAULT_DELTA, "margin": 1e-3,
                 "tolerance": 1e-5, "radius_convention": "enclosing", "seed": 0},
    "output": {"format": "json", "path": None},
}

FAMILY_PARAMS = {
    "clifford": {"r": 0.6},
    "geodesic_sphere": {"rho": 0.5, "center": None},
    "perturbed_sphere": {"rho": 0.5, "amplitude": 0.05, "frequency": 3, "center": None},
}


class InputError(Exception):
    """Invalid configuration or command-line input (exit 2)."""


def load_schema():
    text = resources.files("transgauss").joinpath("config_schema.json").read_text("utf-8")
    return json.loads(text)


def _merge(base, over):
    out = copy.deepcopy(base)
    for key, val in over.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def resolve_config(raw, grid=None, convention=None, out=None):
    """Validate ``raw`` against the schema and fill every default."""
    try:
        jsonschema.validate(raw, load_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InputError(f"config invalid at {where}: {exc.message}") from exc
    cfg = _merge(DEFAULTS, raw)
    if grid is not None:
        cfg["grid"]["nodes"] = grid
    if convention is not None:
        cfg["numerics"]["radius_convention"] = convention
    if out is not None:
        cfg["output"]["path"] = out

    surf = cfg["surface"]
    allowed = FAMILY_PARAMS[surf["family"]]
    extra = sorted(set(surf["params"]) - set(allowed))
    if extra:
        raise InputError(f"parameters {extra} do not apply to family {surf['family']!r}")
    surf["params"] = _merge(allowed, surf["params"])
    n = surf["n"]
    if "center" in allowed:
        if surf["params"]["center"] is None:
            surf["params"]["center"] = sphere.basis_vector(n + 1, n + 2).tolist()
        if len(surf["params"]["center"]) != n + 2:
            raise InputError("surface center must have n + 2 coordinates")

    st = cfg["structure"]
    if st["kind"] == "quaternion":
        if n != 2:
            raise InputError("the quaternion structure needs n = 2 (ambient S^3)")
        st["base_point"] = QuaternionStructure.p0.tolist()
    elif st["base_point"] is None:
        st["base_point"] = (surf["params"]["center"] if "center" in allowed
                            else sphere.basis_vector(0, n + 2).tolist())
    if len(st["base_point"]) != n + 2:
        raise InputError("structure base_point must have n + 2 coordinates")
    return cfg


def build_surface(cfg):
    surf = cfg["surface"]
    p, n = surf["params"], surf["n"]
    if surf["family"] == "clifford":
        return make_clifford(n, p["r"])
    center = np.asarray(p["center"], dtype=float)
    if surf["family"] == "geodesic_sphere":
        return make_geodesic_sphere(center, p["rho"], n)
    return make_perturbed_sphere(center, p["rho"], p["amplitude"], p["frequency"], n)


def build_structure(cfg):
    st = cfg["structure"]
    if st["kind"] == "quaternion":
        return QuaternionStructure()
    base = sphere.sphere_point(np.asarray(st["base_point"], dtype=float), tol=1e-9)
    if st["kind"] == "frame":
        return FrameStructure.from_parallel(base)
    return ParallelTransportStructure(base)


def build_grid(cfg, imm):
    return make_grid(imm, cfg["grid"]["nodes"], cfg["grid"]["rule"])


# ---------------------------------------------------------------------------
# serialisation


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps(obj):
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _emit(text, path):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# commands


def cmd_report(cfg):
    imm = build_surface(cfg)
    grid = build_grid(cfg, imm)
    s = curvature.sample_surface(build_structure(cfg), imm, grid.nodes, h=cfg["numerics"]["h_fd"])
    n = imm.n
    cols = {f"u{i + 1}": s.u[:, i] for i in range(n)}
    cols.update({f"lambda_{i + 1}": s.lam[:, i] for i in range(n)})
    cols.update({"c": s.c, "kappa_gamma": s.kappa, "gk": s.gk, "prop_residual": s.prop_residual})
    summary = {k: {"min": float(v.min()), "max": float(v.max())} for k, v in cols.items()}
    path = cfg["output"]["path"]
    if cfg["output"]["format"] == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(cols))
        for row in zip(*cols.values()):
            w.writerow([repr(float(x)) for x in row])
        _emit(buf.getvalue(), path)
        side = dumps({"config": cfg, "rows": len(s), "summary": summary})
        if path is None:
            sys.stderr.write(side)
        else:
            _emit(side, path.rsplit(".", 1)[0] + ".summary.json")
    else:
        _emit(dumps({"config": cfg, "rows": len(s), "summary": summary,
                     "table": {k: v for k, v in cols.items()}}), path)
    return EXIT_OK


def cmd_gauss_bonnet(cfg):
    imm = build_surface(cfg)
    grid = build_grid(cfg, imm)
    structure = build_structure(cfg)
    samples = curvature.sample_surface(structure, imm, grid.nodes, h=cfg["numerics"]["h_fd"])
    rep = gauss_bonnet.gauss_bonnet_check(structure, imm, grid, samples)
    deg = gauss_bonnet.degree_by_preimage(structure, imm, grid, seed=cfg["numerics"]["seed"])
    tol = cfg["numerics"]["tolerance"]
    ok = rep.residual < tol and deg == round(rep.degree_estimate)
    out = {"config": cfg, "integral": rep.integral,
           "integral_shape_path": rep.integral_shape_path, "target": rep.target,
           "residual": rep.residual, "tolerance": tol, "degree_integral": rep.degree_estimate,
           "degree_preimage": deg, "chi": rep.chi, "c_n": rep.c_n, "passed": ok}
    _emit(dumps(out), cfg["output"]["path"])
    return EXIT_OK if ok else EXIT_FAILED


def cmd_certify(cfg):
    imm = build_surface(cfg)
    grid = build_grid(cfg, imm)
    num = cfg["numerics"]
    reports = {}
    for conv in ("enclosing", "lemma"):
        reports[conv] = rigidity.certify_sphere(imm, grid, num["delta"], conv,
                                                seed=num["seed"]).to_dict()
    chosen = reports[num["radius_convention"]]
    out = {"config": cfg, "certificate": chosen, "all_conventions": reports,
           "certified": chosen["verdict"] == "certified"}
    _emit(dumps(out), cfg["output"]["path"])
    return EXIT_OK if out["certified"] else EXIT_FAILED


def cmd_counterexample(cfg, epsilon):
    rep = rigidity.counterexample_family(epsilon, cfg["surface"]["n"], cfg["grid"]["nodes"])
    _emit(dumps({"config": cfg, "epsilon": epsilon, "report": rep.to_dict()}),
          cfg["output"]["path"])
    return EXIT_OK if rep.passed else EXIT_FAILED


def cmd_xia(cfg):
    imm = build_surface(cfg)
    grid = build_grid(cfg, imm)
    num = cfg["numerics"]
    rep = beltrami.xia_certify(imm, grid, margin=num["margin"], delta=num["delta"],
                               seed=num["seed"])
    _emit(dumps({"config": cfg, "report": rep.to_dict()}), cfg["output"]["path"])
    return EXIT_OK if rep.certified else EXIT_FAILED


COMMANDS = {
    "report": cmd_report,
    "gauss-bonnet": cmd_gauss_bonnet,
    "certify": cmd_certify,
    "counterexample": cmd_counterexample,
    "xia": cmd_xia,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="transgauss",
        description="Translational Gauss maps, Gauss-Bonnet checks and rigidity certificates.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", metavar="PATH", help="JSON run configuration")
        p.add_argument("--out", metavar="PATH", help="report path (default: stdout)")
        p.add_argument("--grid", type=int, metavar="N", help="nodes per chart axis")
        p.add_argument("--convention", choices=("enclosing", "lemma"))
        if name == "counterexample":
            p.add_argument("--epsilon", type=float, required=True)
    return parser


def _read_config(path):
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc}") from exc


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        if args.grid is not None and args.grid < 2:
            raise InputError("--grid must be at least 2")
        cfg = resolve_config(_read_config(args.config), args.grid, args.convention, args.out)
        if args.command != "report" and cfg["output"]["format"] == "csv":
            raise InputError("csv output is only available for the report command")
        if args.command == "counterexample":
            return cmd_counterexample(cfg, args.epsilon)
        return COMMANDS[args.command](cfg)
    except (InputError, ValueError) as exc:
        # DomainError and OddDimension are ValueErrors: bad input, not a failed run
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except GeometryError as exc:
        sys.stderr.write(f"geometry error ({type(exc).__name__}): {exc}\n")
        return EXIT_GEOMETRY


if __name__ == "__main__":
    sys.exit(main())
