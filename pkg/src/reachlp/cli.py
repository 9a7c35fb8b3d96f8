"""Command-line front end: ``reachlp --input problem.json --command solve``.

Exit code 0 means success and 1 an error such as bad input or a solver
failure; 2 means a result was produced but one of its certificates failed.
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass, field
import json
import logging
from pathlib import Path
import sys
from typing import List, Optional
import warnings

import jsonschema
import numpy as np

from .dual import assemble_omega, epsilon_sweep, solve_limit_set, verify_invariance, verify_tightness
from .errors import AssumptionOneViolated, ReachError, SchemaError
from .geometry import HPolytope, is_nonempty, kappa_estimate, vertices
from .lp import TOL_FEAS, TOL_GAP
from .lyapunov import auto_norm, check_assumption2
from .normals import FacetNormals, axis_normals, check_assumption1, make_normals
from .oracle import compare_results, projected_iteration, support_series
from .schema import INPUT_SCHEMA, OUTPUT_SCHEMA
from .system import Ball, ControlSystem, load_system, system_to_document

log = logging.getLogger("reachlp")

COMMANDS = ("solve", "iterate", "compare", "check", "kappa")
EMIT_KINDS = ("json", "csv", "svg")
EXIT_OK, EXIT_ERROR, EXIT_CERT = 0, 1, 2

SERIES_TOL = 1e-9
CERT_TOL = 1e-7


@dataclass
class RunConfig:
    command: str
    input: Path
    output: Optional[Path] = None
    normals: Optional[dict] = None
    ell: Optional[float] = None
    epsilon: float = 0.0
    eps_sweep: Optional[List[float]] = None
    tol_feas: float = TOL_FEAS
    tol_gap: float = TOL_GAP
    tol_iter: float = 1e-8
    tol_compare: float = 1e-6
    seed: int = 0
    kappa_samples: int = 256
    max_iter: int = 10_000
    emit: tuple = ("json",)
    document: dict = field(default_factory=dict, repr=False)


def parse_normals_spec(text: str) -> dict:
    """``uniform2d:N``, ``icosphere:L`` or ``axis``."""
    name, _, arg = text.partition(":")
    if name == "axis" and not arg:
        return {"type": "axis"}
    if name in ("uniform2d", "icosphere") and arg.isdigit():
        key = "count" if name == "uniform2d" else "level"
        return {"type": name, key: int(arg)}
    raise argparse.ArgumentTypeError(f"bad normals spec {text!r}; use uniform2d:N, icosphere:L or axis")


def _float_list(text: str) -> List[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _emit_list(text: str) -> tuple:
    kinds = tuple(t.strip() for t in text.split(",") if t.strip())
    bad = [k for k in kinds if k not in EMIT_KINDS]
    if bad or not kinds:
        raise argparse.ArgumentTypeError(f"emit kinds must be among {', '.join(EMIT_KINDS)}")
    return kinds


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="reachlp",
        description="Outer polytope approximation of the infinite-time reachable set of x+ = Cx + Du.",
    )
    p.add_argument("--input", required=True, type=Path, help="problem file (JSON)")
    p.add_argument("--output", type=Path, help="result file (JSON); stdout if omitted")
    p.add_argument("--command", choices=COMMANDS, default="solve")
    p.add_argument("--epsilon", type=float, help="inflation radius of V (default 0)")
    p.add_argument("--eps-sweep", type=_float_list, help="decreasing eps values, e.g. 0.1,0.05,0.025")
    p.add_argument("--ell", type=float, help="contraction rate of the Lyapunov norm (auto if omitted)")
    p.add_argument("--normals", type=parse_normals_spec, help="uniform2d:N, icosphere:L or axis")
    p.add_argument("--tol-feas", type=float, help=f"LP feasibility tolerance (default {TOL_FEAS:g})")
    p.add_argument("--tol-gap", type=float, help=f"LP duality-gap tolerance (default {TOL_GAP:g})")
    p.add_argument("--tol-iter", type=float, help="projected-iteration tolerance (default 1e-8)")
    p.add_argument("--tol-compare", type=float, help="LP vs oracle agreement tolerance (default 1e-6)")
    p.add_argument("--seed", type=int, help="seed for kappa sampling and the uniqueness probe")
    p.add_argument("--emit", type=_emit_list, default=("json",), help="comma list of json,csv,svg")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def load_document(path: Path) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise SchemaError("", f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
    try:
        jsonschema.validate(doc, INPUT_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise SchemaError(".".join(str(p) for p in exc.absolute_path), exc.message) from None
    return doc


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Merge the input document with command-line overrides; flags win."""
    doc = load_document(args.input)
    tols = doc.get("tolerances", {})

    def pick(flag, key, default):
        return flag if flag is not None else doc.get(key, default)

    return RunConfig(
        command=args.command,
        input=args.input,
        output=args.output,
        normals=args.normals or doc.get("normals"),
        ell=pick(args.ell, "ell", None),
        epsilon=float(pick(args.epsilon, "epsilon", 0.0)),
        eps_sweep=pick(args.eps_sweep, "eps_sweep", None),
        tol_feas=args.tol_feas if args.tol_feas is not None else tols.get("feas", TOL_FEAS),
        tol_gap=args.tol_gap if args.tol_gap is not None else tols.get("gap", TOL_GAP),
        tol_iter=args.tol_iter if args.tol_iter is not None else tols.get("iter", 1e-8),
        tol_compare=args.tol_compare if args.tol_compare is not None else tols.get("compare", 1e-6),
        seed=int(pick(args.seed, "seed", 0)),
        kappa_samples=int(doc.get("kappa_samples", 256)),
        max_iter=int(doc.get("max_iter", 10_000)),
        emit=args.emit,
        document=doc,
    )


def resolve_normals(spec: Optional[dict], d: int, check: bool = True) -> FacetNormals:
    """Normals from a spec dict; uniform2d:32 in 2D and icosphere:1 in 3D by default."""
    if spec is None:
        if d == 2:
            return make_normals(2, 32)
        if d == 3:
            return make_normals(3, 1)
        raise SchemaError("normals", f"no default normals for dimension {d}; give explicit rows")
    kind = spec["type"]
    if kind == "axis":
        return axis_normals(d)
    if kind == "explicit":
        rows = spec["rows"]
        if len({len(r) for r in rows}) != 1:
            raise SchemaError("normals.rows", "rows have different lengths")
        A = np.array(rows, dtype=float)
        if A.shape[1] != d:
            raise SchemaError("normals.rows", f"rows have length {A.shape[1]}, state dimension is {d}")
        return FacetNormals(A, check=check)
    if kind == "uniform2d":
        if d != 2:
            raise SchemaError("normals", "uniform2d normals need a 2D system")
        return make_normals(2, spec["count"])
    if d != 3:
        raise SchemaError("normals", "icosphere normals need a 3D system")
    return make_normals(3, spec["level"])


def _floats(x) -> list:
    return np.asarray(x, dtype=float).tolist()


def result_document(cfg: RunConfig, normals: FacetNormals, sys: ControlSystem, res, oracle=None) -> dict:
    margins = [None if not np.isfinite(m) else float(m) for m in res.margins]
    doc = {
        "command": cfg.command,
        "b_star": _floats(res.b_star),
        "epsilon": res.epsilon,
        "margins": margins,
        "residuals": _floats(res.residuals),
        "vertices": _floats(res.vertices),
        "ell": res.norm.ell,
        "constants": {"c_2ell": res.norm.c_2ell, "c_ell2": res.norm.c_ell2},
        "kappa_estimate": res.kappa,
        "assumption2": {"holds": res.assumption2.holds, "margin": float(res.assumption2.margin)},
        "hausdorff_certificate": res.hausdorff_certificate,
        "oracle": oracle,
        "timings_ms": {k: float(v) for k, v in res.timings_ms.items()},
        "certificates": res.certificates(CERT_TOL),
        "normals": _floats(normals.A),
        "system": system_to_document(sys),
    }
    return doc


def reverify(doc: dict, tol: float = CERT_TOL) -> dict:
    """Re-check invariance and tightness using only an emitted result document."""
    jsonschema.validate(doc, OUTPUT_SCHEMA)
    if "normals" not in doc or "system" not in doc:
        raise SchemaError("", "result lacks the normals/system needed for re-verification")
    sys_ = load_system(doc["system"])
    normals = FacetNormals(np.array(doc["normals"], dtype=float))
    b = np.array(doc["b_star"], dtype=float)
    eps = float(doc["epsilon"])
    Q = HPolytope(normals, b)
    nonempty = is_nonempty(Q)
    margins = verify_invariance(normals, b, sys_, eps) if nonempty else np.full(normals.N, -np.inf)
    residuals = verify_tightness(b, assemble_omega(normals, sys_, eps))
    return {
        "nonempty": bool(nonempty),
        "invariance": bool(np.all(margins >= -tol)),
        "tightness": bool(np.all(np.abs(residuals) <= tol)),
        "margins": margins,
        "residuals": residuals,
    }


def _sweep_document(sweep) -> dict:
    return {
        "eps": list(sweep.eps),
        "b_eps": _floats(sweep.b_eps),
        "b0": _floats(sweep.b0),
        "gap": sweep.gap,
        "gaps": _floats(sweep.gaps()),
        "monotone": sweep.monotone,
    }


def _solve(cfg, normals, sys_):
    norm = auto_norm(sys_.C, cfg.ell)
    res = solve_limit_set(
        normals,
        sys_,
        cfg.epsilon,
        norm=norm,
        kappa_samples=cfg.kappa_samples,
        seed=cfg.seed,
        tol_feas=cfg.tol_feas,
        tol_gap=cfg.tol_gap,
    )
    return res


def cmd_solve(cfg: RunConfig, normals, sys_):
    res = _solve(cfg, normals, sys_)
    doc = result_document(cfg, normals, sys_, res)
    ok = res.ok
    if cfg.eps_sweep:
        sweep = epsilon_sweep(normals, sys_, cfg.eps_sweep)
        doc["eps_sweep"] = _sweep_document(sweep)
        doc["certificates"]["eps_monotone"] = sweep.monotone
        ok = ok and sweep.monotone
    extras = {"result": res}
    return doc, ok, extras


def cmd_compare(cfg: RunConfig, normals, sys_):
    res = _solve(cfg, normals, sys_)
    series, tails = support_series(sys_, normals.A, SERIES_TOL, res.norm, res.epsilon)
    it = projected_iteration(normals, sys_, res.epsilon, cfg.tol_iter, cfg.max_iter, norm=res.norm)
    bound = None if res.error is None else res.error.euclidean_bound
    report = compare_results(res.b_star, series, it.b, tails, cfg.tol_compare, normals=normals, bound=bound)
    if report.inconclusive:
        log.warning("containment inconclusive on %d facets", report.containment.count("inconclusive"))
    oracle = {
        "series": _floats(series),
        "series_tail": _floats(tails),
        "b_hat": _floats(it.b),
        "steps": it.k,
        "converged": it.converged,
        "max_gap": report.max_gap,
        "report": report.as_dict(),
    }
    doc = result_document(cfg, normals, sys_, res, oracle)
    doc["certificates"]["oracle_agreement"] = report.ok and it.converged
    return doc, res.ok and report.ok and it.converged, {"result": res, "iteration": it}


def cmd_iterate(cfg: RunConfig, normals, sys_):
    norm = auto_norm(sys_.C, cfg.ell)
    it = projected_iteration(normals, sys_, cfg.epsilon, cfg.tol_iter, cfg.max_iter, norm=norm)
    Q = HPolytope(normals, it.b)
    doc = {
        "command": "iterate",
        "b_hat": _floats(it.b),
        "steps": it.k,
        "converged": it.converged,
        "increments": _floats(it.increments),
        "epsilon": cfg.epsilon,
        "ell": norm.ell,
        "vertices": _floats(vertices(Q)),
        "normals": _floats(normals.A),
        "system": system_to_document(sys_),
    }
    return doc, it.converged, {"iteration": it}


def cmd_kappa(cfg: RunConfig, normals, sys_):
    kappa = kappa_estimate(normals, cfg.kappa_samples, cfg.seed)
    norm = auto_norm(sys_.C, cfg.ell)
    a2 = check_assumption2(norm, kappa)
    doc = {
        "command": "kappa",
        "kappa_estimate": kappa,
        "samples": cfg.kappa_samples,
        "seed": cfg.seed,
        "ell": norm.ell,
        "constants": {"c_2ell": norm.c_2ell, "c_ell2": norm.c_ell2},
        "assumption2": {"holds": a2.holds, "margin": float(a2.margin), "threshold": float(a2.threshold)},
    }
    return doc, True, {}


def cmd_check(cfg: RunConfig, normals, sys_):
    report = check_assumption1(normals.A)
    doc = {"command": "check", "assumption1": report.as_dict()}
    try:
        norm = auto_norm(sys_.C, cfg.ell)
        doc["stability"] = {"contractive": True, "ell": norm.ell}
    except ReachError as exc:
        doc["stability"] = {"contractive": False, "reason": str(exc)}
    return doc, report.ok and doc["stability"]["contractive"], {}


HANDLERS = {"solve": cmd_solve, "iterate": cmd_iterate, "compare": cmd_compare, "check": cmd_check, "kappa": cmd_kappa}


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def vertices_csv(V) -> str:
    return "".join(",".join(_fmt(x) for x in row) + "\n" for row in np.asarray(V))


def _ccw(P: np.ndarray) -> np.ndarray:
    """Convex polygon vertices in counter-clockwise order."""
    c = P.mean(axis=0)
    return P[np.argsort(np.arctan2(P[:, 1] - c[1], P[:, 0] - c[0]))]


def _V_outline(sys_: ControlSystem) -> np.ndarray:
    if isinstance(sys_.U, Ball):
        u, s, _ = np.linalg.svd(sys_.D, full_matrices=False)
        t = np.linspace(0.0, 2.0 * np.pi, 96, endpoint=False)
        circle = np.zeros((len(t), len(s)))
        circle[:, 0] = np.cos(t)
        if len(s) > 1:
            circle[:, 1] = np.sin(t)
        return sys_.D @ sys_.U.center + sys_.U.radius * (circle * s) @ u.T
    P = np.unique(np.round(sys_.V_vertices(), 12), axis=0)
    return _ccw(P) if len(P) > 2 else P


def svg_document(polygons, size: int = 480) -> str:
    """Static SVG of labelled 2D point chains ``[(label, points, colour), ...]``."""
    pts = np.vstack([p for _, p, _ in polygons if len(p)])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = float(max(hi - lo)) or 1.0
    pad = 0.08 * span
    scale = size / (span + 2 * pad)

    def xy(p):
        return (p[0] - lo[0] + pad) * scale, (hi[1] - p[1] + pad) * scale

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">']
    out.append('<rect width="100%" height="100%" fill="white"/>')
    for k, (label, P, colour) in enumerate(polygons):
        coords = " ".join("%.3f,%.3f" % xy(p) for p in P)
        tag = "polygon" if len(P) > 2 else "polyline"
        out.append(f'<{tag} points="{coords}" fill="none" stroke="{colour}" stroke-width="1.5"><title>{label}</title></{tag}>')
        out.append(f'<text x="8" y="{18 + 16 * k}" font-size="13" fill="{colour}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_outputs(cfg: RunConfig, doc: dict, normals, sys_, extras) -> None:
    if "json" in cfg.emit:
        text = json.dumps(doc, indent=2, allow_nan=False)
        if cfg.output is None:
            sys.stdout.write(text + "\n")
        else:
            cfg.output.write_text(text + "\n", encoding="utf-8")
    needs_file = [k for k in cfg.emit if k != "json"]
    if needs_file and cfg.output is None:
        raise SchemaError("--output", f"emitting {', '.join(needs_file)} requires an output path")
    if "csv" in cfg.emit and "vertices" in doc:
        cfg.output.with_suffix(".csv").write_text(vertices_csv(doc["vertices"]), encoding="utf-8")
    if "svg" in cfg.emit:
        if normals.d != 2:
            log.warning("svg output is only drawn for 2D systems")
            return
        shapes = []
        res = extras.get("result")
        if res is not None and len(res.vertices):
            shapes.append(("Q(b*)", _ccw(res.vertices), "#1f4e9c"))
        it = extras.get("iteration")
        if it is None and res is not None:
            it = projected_iteration(normals, sys_, res.epsilon, cfg.tol_iter, cfg.max_iter, norm=res.norm)
        if it is not None:
            shapes.append(("final iterate", _ccw(vertices(HPolytope(normals, it.b))), "#c0392b"))
        shapes.append(("V", _V_outline(sys_), "#27864a"))
        cfg.output.with_suffix(".svg").write_text(svg_document(shapes), encoding="utf-8")


def run(cfg: RunConfig) -> int:
    """Execute one command; returns the process exit code."""
    try:
        sys_ = load_system(cfg.document)
        normals = resolve_normals(cfg.normals, sys_.d, check=cfg.command != "check")
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            doc, ok, extras = HANDLERS[cfg.command](cfg, normals, sys_)
        if caught:
            doc["warnings"] = [str(w.message) for w in caught]
            for w in caught:
                log.warning("%s", w.message)
        if "b_star" in doc:
            jsonschema.validate(doc, OUTPUT_SCHEMA)
        write_outputs(cfg, doc, normals, sys_, extras)
    except AssumptionOneViolated as exc:
        log.error("Assumption 1 fails: %s", exc)
        if exc.report.direction is not None:
            log.error("direction with no positive combination: %s", np.asarray(exc.report.direction).tolist())
        return EXIT_ERROR
    except ReachError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_ERROR
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_ERROR
    if cfg.command == "check":
        if not ok:
            log.error("check failed: %s", doc["assumption1"]["reason"] or doc["stability"].get("reason"))
        return EXIT_OK if ok else EXIT_ERROR
    if not ok:
        failed = [k for k, v in doc.get("certificates", {"converged": False}).items() if not v]
        log.error("certificate failure: %s", ", ".join(failed) or "iteration did not converge")
        return EXIT_CERT
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = config_from_args(args)
    except ReachError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_ERROR
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
