"""Command-line front end.

Every command writes one canonical JSON document (sorted keys) to --out or
stdout, or a short text summary with ``--format text``. Exit codes: 0 ok,
1 a verified property failed, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .metrics import MetricError, MetricSpec, load_metric, metric_at
from .operators import (
    PLANE_TYPES,
    OperatorError,
    SamplingError,
    jacobi_op,
    make_plane,
    sample_plane,
    sample_unit,
    skew_op,
    szabo_op,
)
from .polyfunc import PolyError
from .spectral import SpectralError, jordan_profile, numerical_rank, spectrum
from .tensor_engine import ROUTES, RouteError, christoffel, curvature
from .verifier import PROPERTIES, Tolerances, _plain, run_property, square_residual, verify_all

COMMANDS = ("curvature", "christoffel", "ricci", "jacobi", "szabo", "skewcurv", "jordan", "sample",
            "verify", "verify-all")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    metric: str
    point: str | None = None
    vector: str | None = None
    plane: str | None = None
    samples: int = 100
    points: int = 10
    seed: int = 0
    rank_tol: float = 1e-8
    zero_tol: float = 1e-10
    out: str | None = None
    format: str = "json"
    property: str | None = None
    operator: str = "jacobi"
    sign: int = 1
    plane_type: str | None = None
    route: str = "general"
    nabla: bool = False
    timing: bool = False

    def tolerances(self) -> Tolerances:
        return Tolerances(rank=self.rank_tol, zero=self.zero_tol)


# -- parsing ------------------------------------------------------------------------

def parse_floats(text: str, what: str, n: int | None = None) -> np.ndarray:
    try:
        vals = np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise UsageError(f"--{what} must be comma-separated numbers, got {text!r}") from None
    if not np.all(np.isfinite(vals)):
        raise UsageError(f"--{what} has non-finite entries: {text!r}")
    if n is not None and vals.size != n:
        raise UsageError(f"--{what} needs {n} coordinates (chart order x, y, w), got {vals.size}")
    return vals


def parse_plane(text: str, n: int) -> tuple[np.ndarray, np.ndarray]:
    parts = text.split(";")
    if len(parts) != 2:
        raise UsageError(f"--plane must be two vectors separated by ';', got {text!r}")
    return parse_floats(parts[0], "plane", n), parse_floats(parts[1], "plane", n)


def _common_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--metric", required=True, metavar="FILE", help="metric spec JSON")
    p.add_argument("--point", metavar="STR", help="comma-separated point in chart order (x, y, w); default origin")
    p.add_argument("--vector", metavar="STR", help="comma-separated tangent vector")
    p.add_argument("--plane", metavar="STR;STR", help="two tangent vectors separated by ';'")
    p.add_argument("--samples", type=int, default=100, metavar="N", help="samples per domain (default 100)")
    p.add_argument("--points", type=int, default=10, metavar="N", help="sampled points (default 10)")
    p.add_argument("--seed", type=int, default=0, metavar="N", help="random seed (default 0)")
    p.add_argument("--rank-tol", type=float, default=1e-8, metavar="X", help="relative rank tolerance (default 1e-8)")
    p.add_argument("--zero-tol", type=float, default=1e-10, metavar="X", help="vanishing tolerance (default 1e-10)")
    p.add_argument("--out", metavar="FILE", help="write output here instead of stdout")
    p.add_argument("--format", choices=("json", "text"), default="json", help="output format (default json)")
    p.add_argument("--timing", action="store_true", help="include elapsed_ms in reports (breaks byte-identity)")
    return p


FLAG_SUMMARY = """\
common flags (every subcommand):
  --metric FILE  --point STR  --vector STR  --plane STR;STR
  --samples N (100)  --points N (10)  --seed N (0)
  --rank-tol X (1e-8)  --zero-tol X (1e-10)  --out FILE  --format json|text (json)  --timing
extra flags:
  curvature: --route {general,closed_psi,hypersurface} (general)  --nabla
  jordan: --operator {jacobi,szabo,skew} (jacobi)
  sample: --sign {1,-1} (1)  --plane-type {spacelike,timelike,mixed}
  verify: --property NAME (required)
exit codes: 0 ok, 1 property failed, 2 usage or input error"""


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(
        prog="nilcurv", description="Curvature operators and nilpotency certificates for polynomial metrics.",
        epilog=FLAG_SUMMARY, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, metavar="{" + ",".join(COMMANDS) + "}")
    helps = {
        "curvature": "curvature tensor R (and nabla R with --nabla) at --point",
        "christoffel": "Christoffel symbols at --point",
        "ricci": "Ricci tensor at --point",
        "jacobi": "Jacobi operator of --vector at --point",
        "szabo": "Szabo operator of --vector at --point",
        "skewcurv": "skew-symmetric curvature operator of --plane at --point",
        "jordan": "Jordan profile of an operator (--operator) at --point",
        "sample": "sample unit vectors (--sign) or planes (--plane-type) at --point",
        "verify": "run one property certificate (--property)",
        "verify-all": "run every certificate that applies to the metric family",
    }
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common], help=helps[name], description=helps[name])
        if name == "curvature":
            sp.add_argument("--route", choices=ROUTES, default="general")
            sp.add_argument("--nabla", action="store_true", help="also emit nabla R")
        if name == "jordan":
            sp.add_argument("--operator", choices=("jacobi", "szabo", "skew"), default="jacobi")
        if name == "sample":
            sp.add_argument("--sign", type=int, choices=(1, -1), default=1)
            sp.add_argument("--plane-type", choices=PLANE_TYPES)
        if name == "verify":
            sp.add_argument("--property", required=True, choices=PROPERTIES)
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    fields = {k: v for k, v in vars(ns).items() if k in RunConfig.__dataclass_fields__}
    cfg = RunConfig(**fields)
    if cfg.samples < 1 or cfg.points < 1:
        raise UsageError("--samples and --points must be positive")
    if cfg.rank_tol <= 0 or cfg.zero_tol <= 0:
        raise UsageError("tolerances must be positive")
    return cfg


# -- commands --------------------------------------------------------------------------

def _point(cfg: RunConfig, spec: MetricSpec) -> np.ndarray:
    if cfg.point is None:
        return np.zeros(spec.dim)
    return parse_floats(cfg.point, "point", spec.dim)


def _vector(cfg: RunConfig, spec: MetricSpec) -> np.ndarray:
    if cfg.vector is None:
        raise UsageError(f"{cfg.command} needs --vector")
    return parse_floats(cfg.vector, "vector", spec.dim)


def _operator_summary(A: np.ndarray, tol: Tolerances, ref: float) -> dict:
    return {"matrix": A, "rank": numerical_rank(A, tol.rank, ref), "spectrum": spectrum(A, tol.rank),
            "square_residual": square_residual(A)}


def _compute(cfg: RunConfig, spec: MetricSpec) -> tuple[dict, int]:
    tol = cfg.tolerances()
    cmd = cfg.command
    if cmd in ("verify", "verify-all"):
        if cmd == "verify":
            point = None if cfg.point is None else _point(cfg, spec)
            reports = [run_property(cfg.property, spec, cfg.points, cfg.samples, tol, cfg.seed, point)]
        else:
            reports = verify_all(spec, cfg.points, cfg.samples, tol, cfg.seed)
        failed = any(r.status == "fail" for r in reports)
        out = {"reports": [r.to_dict(cfg.timing) for r in reports],
               "status": "fail" if failed else "pass"}
        return out, EXIT_FAIL if failed else EXIT_OK

    P = _point(cfg, spec)
    gP = metric_at(spec, P)
    out: dict = {"point": P, "signature": list(gP.signature)}
    if cmd == "christoffel":
        out["christoffel"] = christoffel(spec, P)
        return out, EXIT_OK
    if cmd == "sample":
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
        if cfg.plane_type:
            out["planes"] = [sample_plane(spec, P, cfg.plane_type, rng, gP).to_dict() for _ in range(cfg.samples)]
        else:
            out["sign"] = cfg.sign
            out["vectors"] = [sample_unit(spec, P, cfg.sign, rng, gP) for _ in range(cfg.samples)]
        return out, EXIT_OK

    need_nabla = cmd == "szabo" or (cmd == "jordan" and cfg.operator == "szabo") or cfg.nabla
    curv = curvature(spec, P, cfg.route, nabla=need_nabla)
    if cmd == "curvature":
        out.update(route=cfg.route, R=curv.R, scale=curv.scale)
        if cfg.nabla:
            out["nablaR"] = curv.nablaR
        return out, EXIT_OK
    if cmd == "ricci":
        out.update(ricci=curv.ricci, max_abs=float(np.abs(curv.ricci).max()))
        return out, EXIT_OK

    kind = cfg.operator if cmd == "jordan" else {"jacobi": "jacobi", "szabo": "szabo", "skewcurv": "skew"}[cmd]
    if kind == "skew":
        if cfg.plane is None:
            raise UsageError(f"{cmd} needs --plane")
        plane = make_plane(gP, *parse_plane(cfg.plane, spec.dim))
        A = skew_op(curv, gP, plane).mat
        out["plane"] = plane.to_dict()
        ref = curv.scale
    else:
        X = _vector(cfg, spec)
        if kind == "jacobi":
            A = jacobi_op(curv, gP, X).mat
            ref = curv.scale
        else:
            A = szabo_op(curv.nablaR, gP, X).mat
            ref = 1.0 + float(np.abs(curv.nablaR).max())
        out["vector"] = X
        out["norm"] = float(X @ gP.g @ X)
    out["operator"] = kind
    out.update(_operator_summary(A, tol, ref))
    if cmd == "jordan":
        out["jordan"] = jordan_profile(A, tol.rank, ref).to_dict()
    return out, EXIT_OK


# -- output ----------------------------------------------------------------------------

def render_json(doc: dict) -> str:
    return json.dumps(_plain(doc), sort_keys=True, indent=2) + "\n"


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, list) and v and isinstance(v[0], list) and len(v) <= 12 and all(
            not isinstance(x, list) for x in v[0]):
        return "\n" + "\n".join("    " + " ".join(f"{x:>11.4g}" for x in row) for row in v)
    return json.dumps(v)


def render_text(doc: dict) -> str:
    doc = _plain(doc)
    lines = []
    if "reports" in doc:
        for r in doc["reports"]:
            lines.append(f"{r['property']}: {r['status']}  samples={json.dumps(r['samples'], sort_keys=True)}"
                         f"  witnesses={len(r['witnesses'])}")
            verdict = r["details"].get("verdict")
            if verdict:
                lines.append(f"    {verdict}")
        lines.append(f"overall: {doc['status']}")
        return "\n".join(lines) + "\n"
    for key in sorted(doc):
        if key == "config":
            continue
        val = doc[key]
        if key in ("R", "nablaR", "christoffel"):
            arr = np.asarray(val)
            nz = [(idx, x) for idx, x in np.ndenumerate(arr) if x != 0.0]
            lines.append(f"{key}: {len(nz)} nonzero components (1-based indices)")
            lines.extend(f"    {','.join(str(i + 1) for i in idx)}: {x:.6g}" for idx, x in nz)
            continue
        if key == "spectrum":
            lines.append("spectrum: " + ", ".join(f"{re:.6g}" if im == 0 else f"{re:.6g}{im:+.6g}i" for re, im in val))
            continue
        lines.append(f"{key}: {_fmt(val)}")
    return "\n".join(lines) + "\n"


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:  # argparse: --help exits 0, bad usage exits 2
        return int(exc.code or 0)
    try:
        cfg = config_from_args(ns)
        spec = load_metric(cfg.metric)
        doc, code = _compute(cfg, spec)
    except (UsageError, MetricError, PolyError, OperatorError, RouteError, OSError) as exc:
        print(f"nilcurv {ns.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SamplingError, SpectralError, ValueError) as exc:
        print(f"nilcurv {ns.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    doc["config"] = asdict(cfg)
    text = render_json(doc) if cfg.format == "json" else render_text(doc)
    if cfg.out:
        try:
            with open(cfg.out, "w") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"nilcurv {ns.command}: cannot write {cfg.out}: {exc}", file=sys.stderr)
            return EXIT_USAGE
    else:
        sys.stdout.write(text)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
