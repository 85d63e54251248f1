"""Command-line driver: single points, parameter sweeps and validation.

Subcommands::

    cvdiscord discord   --family sts --n1 1 --n2 1 --lambda 0.5 [--alpha A] [--r R] [--eps E]
    cvdiscord geometric --family mts --n1 1 --n2 0 --phi 0.7 [--alpha A] [--r R]
    cvdiscord sweep     CONFIG [--out PATH] [--workers N]
    cvdiscord validate  [--level fast|full]

Exit codes: 0 success, 1 validation failure, 2 invalid parameters,
3 truncation-dominated result.

Sweeps run on ``CVDISCORD_WORKERS`` worker processes unless ``--workers``
is given; rows are always written in grid order so the CSV does not depend
on the degree of parallelism.
"""

from __future__ import annotations

import argparse
import ast
import configparser
import csv
import hashlib
import io
import json
import math
import operator
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

from . import __version__, validation
from .covariance import MTS, STS, TwoModeState, gaussian_geometric_discord, standard_form
from .fock import IndexCapError, MeasurementBasis
from .measurement import non_gaussian_discord, non_gaussian_geometric_discord

EXIT_OK, EXIT_VALIDATION, EXIT_INVALID, EXIT_TRUNCATION = 0, 1, 2, 3
WORKERS_ENV = "CVDISCORD_WORKERS"
SCHEMA_VERSION = 1
CLI_DEFAULT_EPS = 1e-5
SWEEP_DEFAULT_EPS = 1e-3
TRUNCATION_NOTE = "truncation-dominated"

COLUMNS = [
    "family", "n1", "n2", "lambda", "phi", "alpha", "r", "eps", "cutoff", "trace_err",
    "mi", "dg", "dng", "geo_g", "geo_ng", "ent_err_bound", "wall_ms", "error",
]  # fmt: skip

# validated parameter ranges (lifted by --unsafe)
LIMITS = {"n": 2.0, "lambda": 0.6, "alpha": 8.0, "r": 0.6}


class ParameterError(ValueError):
    """Invalid or out-of-range parameters; maps to exit code 2."""


@dataclass(frozen=True)
class GridPoint:
    family: str
    n1: float
    n2: float
    strength: float
    alpha: float = 0.0
    r: float = 0.0
    eps: float = SWEEP_DEFAULT_EPS

    def state(self) -> TwoModeState:
        return TwoModeState(self.family, self.n1, self.n2, self.strength)

    def basis(self) -> MeasurementBasis:
        return MeasurementBasis(self.alpha, self.r)


def check_point(p: GridPoint, unsafe: bool = False) -> None:
    if p.family not in (STS, MTS):
        raise ParameterError(f"family must be 'sts' or 'mts', got {p.family!r}")
    values = (p.n1, p.n2, p.strength, p.alpha, p.r, p.eps)
    if not all(math.isfinite(v) for v in values):
        raise ParameterError("parameters must be finite numbers")
    if p.n1 < 0 or p.n2 < 0:
        raise ParameterError("thermal photon numbers must be >= 0")
    if not 0 < p.eps <= 1e-3:
        raise ParameterError(f"eps must lie in (0, 1e-3], got {p.eps}")
    if p.family == MTS and not 0 <= p.strength <= math.pi / 2 + 1e-12:
        raise ParameterError(f"phi must lie in [0, pi/2], got {p.strength}")
    if p.family == STS and p.strength < 0:
        raise ParameterError(f"lambda must be >= 0, got {p.strength}")
    if unsafe:
        return
    if max(p.n1, p.n2) > LIMITS["n"]:
        raise ParameterError(f"N > {LIMITS['n']} is outside the validated range (use --unsafe)")
    if p.family == STS and p.strength > LIMITS["lambda"]:
        raise ParameterError(f"lambda > {LIMITS['lambda']} is outside the validated range (use --unsafe)")
    if abs(p.alpha) > LIMITS["alpha"]:
        raise ParameterError(f"|alpha| > {LIMITS['alpha']} is outside the validated range (use --unsafe)")
    if abs(p.r) > LIMITS["r"]:
        raise ParameterError(f"|r| > {LIMITS['r']} is outside the validated range (use --unsafe)")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, str)):
        return str(x)
    return format(float(x), ".12g")


def compute_record(point: GridPoint, timing: bool = False) -> dict[str, str]:
    """One CSV row; failures are reported in the ``error`` column."""
    row = {c: "" for c in COLUMNS}
    row.update(
        family=point.family,
        n1=_fmt(point.n1),
        n2=_fmt(point.n2),
        alpha=_fmt(point.alpha),
        r=_fmt(point.r),
        eps=_fmt(point.eps),
    )
    row["lambda" if point.family == STS else "phi"] = _fmt(point.strength)
    start = time.perf_counter()
    try:
        state, basis = point.state(), point.basis()
        res = non_gaussian_discord(state, basis, point.eps)
        row.update(
            cutoff=_fmt(res.cutoff.dim),
            trace_err=_fmt(res.cutoff.trace_error),
            mi=_fmt(res.mutual_information),
            dg=_fmt(res.gaussian_discord),
            dng=_fmt(res.non_gaussian_discord),
            geo_g=_fmt(gaussian_geometric_discord(standard_form(state))),
            geo_ng=_fmt(non_gaussian_geometric_discord(state, basis, point.eps)),
            ent_err_bound=_fmt(res.entropy_error_bound),
        )
        if res.truncation_dominated:
            row["error"] = TRUNCATION_NOTE
    except (ValueError, ArithmeticError, IndexCapError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}".replace("\n", " ")
    if timing:
        row["wall_ms"] = _fmt(round(1000 * (time.perf_counter() - start), 3))
    return row


def _compute_timed(point: GridPoint) -> dict[str, str]:
    return compute_record(point, timing=True)


# configuration files


_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}


def _eval_number(node) -> float:
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id == "pi":
        return math.pi
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_number(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
        return _OPS[type(node.op)](_eval_number(node.left), _eval_number(node.right))
    raise ParameterError(f"unsupported expression {ast.dump(node)}")


def parse_number(text: str) -> float:
    """A float literal or arithmetic on literals and ``pi`` (e.g. ``pi/4``)."""
    try:
        return _eval_number(ast.parse(text.strip(), mode="eval").body)
    except SyntaxError as exc:
        raise ParameterError(f"cannot parse number {text!r}") from exc


def parse_grid(text: str) -> list[float]:
    """Comma-separated numbers, ``linspace(start, stop, num)`` or empty."""
    text = text.strip()
    if not text:
        return []
    if text.startswith("linspace(") and text.endswith(")"):
        parts = [p for p in text[len("linspace(") : -1].split(",")]
        if len(parts) != 3:
            raise ParameterError(f"linspace needs three arguments: {text!r}")
        start, stop = parse_number(parts[0]), parse_number(parts[1])
        num = int(parse_number(parts[2]))
        if num < 0:
            raise ParameterError("linspace count must be >= 0")
        if num == 1:
            return [start]
        return [start + (stop - start) * k / (num - 1) for k in range(num)]
    return [parse_number(tok) for tok in text.split(",") if tok.strip()]


@dataclass
class SweepConfig:
    family: str
    n1: list[float]
    strengths: list[float]
    n2: list[float] | None = None
    q: list[float] | None = None
    alpha: list[float] = field(default_factory=lambda: [0.0])
    r: list[float] = field(default_factory=lambda: [0.0])
    eps: float = SWEEP_DEFAULT_EPS
    output: str | None = None
    workers: int | None = None
    unsafe: bool = False

    def points(self) -> list[GridPoint]:
        """Grid in lexicographic order over (n1, n2 or q, strength, alpha, r)."""
        out = []
        second = self.q if self.q is not None else self.n2
        for n1, x, lam, a, r in product(self.n1, second if second is not None else [None], self.strengths, self.alpha, self.r):
            if self.q is not None:
                n2 = x * n1
            elif self.n2 is not None:
                n2 = x
            else:
                n2 = n1
            out.append(GridPoint(self.family, n1, n2, lam, a, r, self.eps))
        return out


def load_config(path: str | Path) -> tuple[SweepConfig, str]:
    """Parse a ``[sweep]`` section; returns the config and the SHA-256 of the file."""
    raw = Path(path).read_bytes()
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(raw.decode("utf-8"))
    except configparser.Error as exc:
        raise ParameterError(f"malformed config: {exc}") from exc
    if "sweep" not in parser:
        raise ParameterError("config needs a [sweep] section")
    sec = parser["sweep"]
    version = sec.get("schema_version")
    if version is None or int(version) != SCHEMA_VERSION:
        raise ParameterError(f"schema_version must be {SCHEMA_VERSION}, got {version}")
    family = sec.get("family", "").strip().lower()
    if family not in (STS, MTS):
        raise ParameterError(f"family must be 'sts' or 'mts', got {family!r}")
    strength_key = "lambda" if family == STS else "phi"
    known = {"schema_version", "family", "n1", "n2", "q", strength_key, "alpha", "r", "eps", "output", "workers", "unsafe"}
    unknown = set(sec) - known
    if unknown:
        raise ParameterError(f"unknown config keys: {sorted(unknown)}")
    if "n2" in sec and "q" in sec:
        raise ParameterError("give either n2 or q, not both")
    cfg = SweepConfig(
        family=family,
        n1=parse_grid(sec.get("n1", "")),
        strengths=parse_grid(sec.get(strength_key, "")),
        n2=parse_grid(sec["n2"]) if "n2" in sec else None,
        q=parse_grid(sec["q"]) if "q" in sec else None,
        alpha=parse_grid(sec.get("alpha", "0")),
        r=parse_grid(sec.get("r", "0")),
        eps=parse_number(sec.get("eps", str(SWEEP_DEFAULT_EPS))),
        output=sec.get("output"),
        workers=int(sec["workers"]) if "workers" in sec else None,
        unsafe=sec.getboolean("unsafe", fallback=False),
    )
    return cfg, hashlib.sha256(raw).hexdigest()


def resolve_workers(cli_value: int | None, cfg_value: int | None = None) -> int:
    if cli_value is not None:
        n = cli_value
    elif os.environ.get(WORKERS_ENV):
        try:
            n = int(os.environ[WORKERS_ENV])
        except ValueError as exc:
            raise ParameterError(f"{WORKERS_ENV} must be an integer") from exc
    elif cfg_value is not None:
        n = cfg_value
    else:
        n = 1
    if n < 1:
        raise ParameterError("worker count must be >= 1")
    return n


def run_sweep(points: list[GridPoint], workers: int = 1, timing: bool = False) -> list[dict[str, str]]:
    fn = _compute_timed if timing else compute_record
    if workers == 1 or len(points) <= 1:
        return [fn(p) for p in points]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, points, chunksize=1))


def render_csv(rows: list[dict[str, str]]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


# subcommands


def _point_from_args(args) -> GridPoint:
    family = args.family.lower()
    if family == STS:
        if args.phi is not None:
            raise ParameterError("--phi applies to MTS; use --lambda for STS")
        strength = 0.0 if args.lam is None else args.lam
    else:
        if args.lam is not None:
            raise ParameterError("--lambda applies to STS; use --phi for MTS")
        strength = 0.0 if args.phi is None else args.phi
    n2 = args.n1 if args.n2 is None else args.n2
    p = GridPoint(family, args.n1, n2, strength, args.alpha, args.r, args.eps)
    check_point(p, args.unsafe)
    return p


def _print_record(row: dict[str, str], keys, out) -> None:
    for k in keys:
        print(f"{k}={row[k]}", file=out)


def cmd_discord(args, out=None) -> int:
    out = sys.stdout if out is None else out
    point = _point_from_args(args)
    row = compute_record(point, timing=True)
    _print_record(row, COLUMNS, out)
    if row["error"] == TRUNCATION_NOTE:
        return EXIT_TRUNCATION
    if row["error"]:
        return EXIT_INVALID
    return EXIT_OK


def cmd_geometric(args, out=None) -> int:
    out = sys.stdout if out is None else out
    point = _point_from_args(args)
    state, basis = point.state(), point.basis()
    print(f"geo_g={_fmt(gaussian_geometric_discord(standard_form(state)))}", file=out)
    print(f"geo_ng={_fmt(non_gaussian_geometric_discord(state, basis, point.eps))}", file=out)
    return EXIT_OK


def cmd_sweep(args, out=None) -> int:
    out = sys.stdout if out is None else out
    cfg, digest = load_config(args.config)
    points = cfg.points()
    for p in points:
        check_point(p, cfg.unsafe or args.unsafe)
    workers = resolve_workers(args.workers, cfg.workers)
    target = Path(args.out or cfg.output or Path(args.config).with_suffix(".csv").name)
    start = time.perf_counter()
    rows = run_sweep(points, workers, timing=args.timing)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(render_csv(rows), encoding="utf-8")
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "config": str(args.config),
        "config_sha256": digest,
        "version": __version__,
        "eps": cfg.eps,
        "rows": len(rows),
        "failed_rows": sum(1 for r in rows if r["error"] and r["error"] != TRUNCATION_NOTE),
        "truncation_dominated_rows": sum(1 for r in rows if r["error"] == TRUNCATION_NOTE),
        "columns": COLUMNS,
        "workers": workers,
        "elapsed_s": round(time.perf_counter() - start, 3),
    }
    Path(str(target) + ".manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {len(rows)} rows to {target}", file=out)
    return EXIT_OK


def cmd_validate(args, out=None) -> int:
    out = sys.stdout if out is None else out
    results = validation.run(args.level, report=lambda line: print(line, file=out, flush=True))
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} suites passed", file=out)
    return EXIT_VALIDATION if failed else EXIT_OK


def _add_point_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", required=True, choices=[STS, MTS], type=str.lower)
    p.add_argument("--n1", type=float, required=True, help="thermal photons of mode A")
    p.add_argument("--n2", type=float, default=None, help="thermal photons of mode B (default: n1)")
    p.add_argument("--lambda", dest="lam", type=float, default=None, help="two-mode squeezing (STS)")
    p.add_argument("--phi", type=float, default=None, help="mixing angle (MTS)")
    p.add_argument("--alpha", type=float, default=0.0, help="displacement of the measurement basis")
    p.add_argument("--r", type=float, default=0.0, help="squeezing of the measurement basis")
    p.add_argument("--eps", type=float, default=CLI_DEFAULT_EPS, help="trace-error tolerance")
    p.add_argument("--unsafe", action="store_true", help="allow parameters outside the validated ranges")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cvdiscord", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("discord", help="discords and geometric discords at one point")
    _add_point_args(p)
    p.set_defaults(func=cmd_discord)
    p = sub.add_parser("geometric", help="Gaussian and non-Gaussian geometric discord at one point")
    _add_point_args(p)
    p.set_defaults(func=cmd_geometric)
    p = sub.add_parser("sweep", help="evaluate a parameter grid from a config file")
    p.add_argument("config")
    p.add_argument("--out", default=None)
    p.add_argument("--workers", type=int, default=None, help=f"worker processes (default: ${WORKERS_ENV}, the config value, or 1)")
    p.add_argument("--timing", action="store_true", help="fill wall_ms (makes the CSV run-dependent)")
    p.add_argument("--unsafe", action="store_true")
    p.set_defaults(func=cmd_sweep)
    p = sub.add_parser("validate", help="oracle equivalence and invariant suites")
    p.add_argument("--level", choices=validation.LEVELS, default="fast")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParameterError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
