"""Command-line experiment runner.

Subcommands::

    checkerboard empty-interval --p 1/2 --T 4 --interval 1/2:5/2 --exact --samples 100000 --seed 1
    checkerboard correlate      --p 1/2 --T 8 --sites 1,2,4 --samples 100000 --seed 1
    checkerboard kernel-table   --kind biased --p 0.5 --T 1..8 --delta 2..8
    checkerboard verify         --profile quick
    checkerboard simulate       --p 1/2 --T 6 --interval 1/2:7/2 --samples 2 --seed 3

Settings may also come from a JSON file given with ``--config``; flags win.
Exit status: 0 ok, 1 a check failed or a z-score was flagged, 2 bad usage or
configuration, 3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from . import __version__
from .errors import CheckerboardError, ConfigParse, ValidationFailed
from .forests import IntervalSpec, sample_choices, hull_region, trajectories_csv
from .kernels import KernelSpec, format_number, kernel_from_description, kernel_table
from .lattice import WeightField, field_from_description
from .montecarlo import Z_FLAG, default_kernel, estimate_correlation, verification_report
from .pointprocess import SiteSet, correlation_mobius, correlation_pfaffian

EXIT_OK, EXIT_FLAGGED, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3
EXPERIMENTS = ("empty-interval", "correlate", "kernel-table", "verify", "simulate")


# --------------------------------------------------------------------------
# Configuration
# --------------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    experiment: str
    field: dict | None = None
    kernel: dict | None = None
    diagonal: int | None = None
    entrance: int = 0
    intervals: list = dc_field(default_factory=list)  # one list of (a, b) pairs per spec
    sites: list = dc_field(default_factory=list)  # one list of sites per set
    exact: bool = False
    samples: int = 0
    seed: int | None = None
    threads: int | None = None
    output: str | None = None
    format: str = "csv"
    kind: str | None = None
    params: dict = dc_field(default_factory=dict)
    T_values: list = dc_field(default_factory=list)
    deltas: list = dc_field(default_factory=list)
    profile: str = "quick"

    def validate(self) -> "ExperimentConfig":
        if self.experiment not in EXPERIMENTS:
            raise ValidationFailed(f"unknown experiment {self.experiment!r}")
        if self.format not in ("csv", "json"):
            raise ValidationFailed(f"unknown format {self.format!r}")
        if self.samples < 0:
            raise ValidationFailed("samples must be non-negative")
        if self.samples and self.seed is None and self.experiment != "verify":
            raise ValidationFailed("a seed is required whenever samples are requested")
        if self.experiment in ("empty-interval", "correlate", "simulate"):
            if self.field is None:
                raise ValidationFailed("a weight field is required (--p or --field)")
            if self.diagonal is None:
                raise ValidationFailed("the observation diagonal is required (--T)")
        if self.experiment in ("empty-interval", "simulate") and not self.intervals:
            raise ValidationFailed("at least one interval is required")
        if self.experiment == "correlate" and not self.sites:
            raise ValidationFailed("at least one site set is required")
        if self.experiment == "simulate" and len(self.intervals) != 1:
            raise ValidationFailed("simulate takes exactly one interval spec")
        if self.experiment == "kernel-table":
            if not self.kind:
                raise ValidationFailed("kernel-table needs --kind")
            if not self.T_values or not self.deltas:
                raise ValidationFailed("kernel-table needs --T and --delta ranges")
        if self.experiment == "verify" and self.profile not in ("quick", "full"):
            raise ValidationFailed(f"unknown profile {self.profile!r}")
        return self


def parse_range(text) -> list[int]:
    """``"1..8"``, ``"1,3,5"``, ``"4"`` or a JSON list into a list of ints."""
    if isinstance(text, list):
        return [int(x) for x in text]
    if isinstance(text, int):
        return [text]
    try:
        out = []
        for part in str(text).split(","):
            if ".." in part:
                lo, hi = part.split("..")
                out.extend(range(int(lo), int(hi) + 1))
            elif part.strip():
                out.append(int(part))
        return out
    except ValueError as exc:
        raise ConfigParse(f"bad integer range {text!r}") from exc


def parse_interval(text) -> tuple[Fraction, Fraction]:
    if isinstance(text, (list, tuple)) and len(text) == 2:
        return Fraction(str(text[0])), Fraction(str(text[1]))
    try:
        a, b = str(text).split(":")
        return Fraction(a), Fraction(b)
    except ValueError as exc:
        raise ConfigParse(f"bad interval {text!r}; expected a:b") from exc


def parse_field(text: str) -> dict:
    """``constant:1/2``, ``polya``, ``alternating:lp,lm,eps`` or ``table:path.csv``."""
    kind, _, arg = text.partition(":")
    if kind == "constant":
        return {"kind": "constant", "p": arg}
    if kind == "polya":
        return {"kind": "polya"}
    if kind == "alternating":
        parts = arg.split(",")
        if len(parts) != 3:
            raise ConfigParse("alternating field needs lambda_plus,lambda_minus,eps")
        return dict(zip(("kind", "lambda_plus", "lambda_minus", "eps"), ["alternating", *parts]))
    if kind == "table":
        return {"kind": "table", "path": arg}
    raise ConfigParse(f"unknown field {text!r}")


def load_config_file(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigParse(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigParse(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigParse("config must be a JSON object")
    return data


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    data = load_config_file(args.config) if args.config else {}
    if args.command is not None:
        data["experiment"] = args.command
    try:
        cfg = ExperimentConfig(experiment=data.get("experiment", ""))
        cfg.field = parse_field(data["field"]) if isinstance(data.get("field"), str) else data.get("field")
        cfg.kernel = data.get("kernel")
        cfg.diagonal = data.get("diagonal", data.get("T") if isinstance(data.get("T"), int) else None)
        cfg.entrance = int(data.get("entrance", 0))
        specs = [[s] if isinstance(s, str) else s for s in data.get("intervals", [])]
        cfg.intervals = [[parse_interval(iv) for iv in spec] for spec in specs]
        cfg.sites = [[int(y) for y in s] for s in data.get("sites", [])]
        cfg.exact = bool(data.get("exact", False))
        cfg.samples = int(data.get("samples", 0))
        cfg.seed = data.get("seed")
        cfg.threads = data.get("threads")
        cfg.output = data.get("output")
        cfg.format = data.get("format", "csv")
        cfg.kind = data.get("kind")
        cfg.params = {k: data[k] for k in ("p", "lam", "lambda_plus", "lambda_minus") if k in data}
        cfg.T_values = parse_range(data["T"]) if "T" in data and cfg.experiment == "kernel-table" else []
        cfg.deltas = parse_range(data["delta"]) if "delta" in data else []
        cfg.profile = data.get("profile", "quick")
    except (TypeError, ValueError, KeyError) as exc:
        if isinstance(exc, CheckerboardError):
            raise
        raise ConfigParse(f"malformed config: {exc}") from exc

    # Flags override the file.
    for name in ("seed", "samples", "threads", "output", "format"):
        val = getattr(args, name, None)
        if val is not None:
            setattr(cfg, name, val)
    if getattr(args, "p", None) is not None and cfg.experiment != "kernel-table":
        cfg.field = {"kind": "constant", "p": args.p}
    if getattr(args, "field", None):
        cfg.field = parse_field(args.field)
    if getattr(args, "T", None) is not None:
        if cfg.experiment == "kernel-table":
            cfg.T_values = parse_range(args.T)
        else:
            cfg.diagonal = int(args.T)
    if getattr(args, "entrance", None) is not None:
        cfg.entrance = args.entrance
    if getattr(args, "interval", None):
        cfg.intervals = [[parse_interval(iv) for iv in args.interval]]
    if getattr(args, "sites", None):
        cfg.sites = [parse_range(s) for s in args.sites]
    if getattr(args, "exact", False):
        cfg.exact = True
    if getattr(args, "kind", None):
        cfg.kind = args.kind
    for name in ("p", "lam", "lambda_plus", "lambda_minus"):
        val = getattr(args, name, None)
        if val is not None and cfg.experiment == "kernel-table":
            cfg.params[name] = val
    if getattr(args, "delta", None):
        cfg.deltas = parse_range(args.delta)
    if getattr(args, "profile", None):
        cfg.profile = args.profile
    if cfg.seed is not None:
        cfg.seed = int(cfg.seed)
    return cfg.validate()


# --------------------------------------------------------------------------
# Output
# --------------------------------------------------------------------------

@dataclass
class Table:
    columns: list
    rows: list
    meta: dict = dc_field(default_factory=dict)
    flagged: bool = False

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(self.columns)
        for row in self.rows:
            wr.writerow([row[c] for c in self.columns])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"meta": self.meta, "rows": self.rows}, indent=2) + "\n"


def write_atomic(path: str, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".checkerboard-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _num(x) -> str:
    return "" if x is None else format_number(x)


# --------------------------------------------------------------------------
# Experiments
# --------------------------------------------------------------------------

def _specs(cfg: ExperimentConfig) -> list[IntervalSpec]:
    return [IntervalSpec.from_intervals(cfg.diagonal, ivs, cfg.entrance) for ivs in cfg.intervals]


def _kernel_for(cfg: ExperimentConfig, field: WeightField, spec) -> KernelSpec:
    if cfg.kernel is None:
        return default_kernel(field, spec)
    return kernel_from_description(cfg.kernel, field)


def run_empty_interval(cfg: ExperimentConfig) -> Table:
    field = field_from_description(cfg.field)
    specs = _specs(cfg)
    kernels = [_kernel_for(cfg, field, s) for s in specs]
    limit = 16 if cfg.exact else -1
    report = verification_report(field, specs, kernels, cfg.samples, cfg.seed or 0, cfg.threads, limit)
    return Table(list(report.COLUMNS), report.records(), flagged=report.flagged)


def run_correlate(cfg: ExperimentConfig) -> Table:
    field = field_from_description(cfg.field)
    rows = []
    flagged = False
    for sites in cfg.sites:
        S = SiteSet(cfg.diagonal, tuple(sites), cfg.entrance)
        spec = IntervalSpec(cfg.diagonal, (Fraction(sites[0]) - Fraction(1, 2), Fraction(sites[-1]) + Fraction(1, 2)), cfg.entrance)
        kern = _kernel_for(cfg, field, spec)
        rm = correlation_mobius(kern, S)
        rp = correlation_pfaffian(kern, S)
        row = {"sites": " ".join(map(str, sites)), "rho_mobius": _num(rm), "rho_pfaffian": _num(rp),
               "mobius_minus_pfaffian": _num(rm - rp), "mc_mean": "", "mc_stderr": "", "z": "", "flag": 0}
        if cfg.samples:
            mc = estimate_correlation(field, S, cfg.samples, cfg.seed, cfg.threads)
            z = (mc.mean - float(rp)) / mc.stderr if mc.stderr else (0.0 if mc.mean == float(rp) else float("inf"))
            row.update(mc_mean=_num(mc.mean), mc_stderr=_num(mc.stderr), z=_num(z), flag=int(abs(z) > Z_FLAG))
            flagged |= abs(z) > Z_FLAG
        rows.append(row)
    cols = ["sites", "rho_mobius", "rho_pfaffian", "mobius_minus_pfaffian", "mc_mean", "mc_stderr", "z", "flag"]
    return Table(cols, rows, flagged=flagged)


def _kernel_params(cfg: ExperimentConfig) -> dict:
    out = {}
    for k, v in cfg.params.items():
        if k == "p":
            out[k] = Fraction(str(v)) if not isinstance(v, float) else v
        else:
            out[k] = float(v)
    return out


def run_kernel_table(cfg: ExperimentConfig) -> Table:
    params = _kernel_params(cfg)
    required = {"biased": ("p",), "asymmetric": ("p",), "poisson": ("lam",),
                "bidirectional": ("lambda_plus", "lambda_minus"), "erfc": ()}
    if cfg.kind not in required:
        raise ValidationFailed(f"kernel-table supports {', '.join(required)}")
    missing = [k for k in required[cfg.kind] if k not in params]
    if missing:
        raise ValidationFailed(f"kernel {cfg.kind!r} needs {', '.join(missing)}")
    rows = [
        {"delta": d, "T": T, "A": _num(a), "A_float": f"{float(a):.17g}"}
        for d, T, a in kernel_table(cfg.kind, cfg.T_values, cfg.deltas, **params)
    ]
    return Table(["delta", "T", "A", "A_float"], rows)


def run_verify(cfg: ExperimentConfig) -> Table:
    from .suite import run_suite

    checks = run_suite(cfg.profile, cfg.seed or 0, cfg.threads)
    rows = [
        {"check": c.name, "error": _num(c.error), "tolerance": _num(c.tolerance),
         "status": "pass" if c.passed else "FAIL", "detail": c.detail}
        for c in checks
    ]
    return Table(["check", "error", "tolerance", "status", "detail"], rows,
                 flagged=not all(c.passed for c in checks))


def run_simulate(cfg: ExperimentConfig) -> Table:
    field = field_from_description(cfg.field)
    spec = _specs(cfg)[0]
    region = hull_region(spec)
    rows = []
    for sample in range(max(cfg.samples, 1)):
        choices = sample_choices(field, region, cfg.seed or 0, sample)
        reader = csv.DictReader(io.StringIO(trajectories_csv(choices, spec)))
        for r in reader:
            rows.append({"sample": sample, **r})
    return Table(["sample", "kind", "id", "diagonal", "position"], rows)


RUNNERS = {
    "empty-interval": run_empty_interval,
    "correlate": run_correlate,
    "kernel-table": run_kernel_table,
    "verify": run_verify,
    "simulate": run_simulate,
}


def run(cfg: ExperimentConfig) -> tuple[int, str]:
    """Execute one experiment; returns (exit status, rendered output)."""
    start = time.perf_counter()
    table = RUNNERS[cfg.experiment](cfg)
    if cfg.format == "json":
        table.meta = {
            "version": __version__,
            "experiment": cfg.experiment,
            "seed": cfg.seed,
            "samples": cfg.samples,
            "field": cfg.field,
            "wall_time_s": round(time.perf_counter() - start, 3),
        }
        text = table.to_json()
    else:
        text = table.to_csv()
    return (EXIT_FLAGGED if table.flagged else EXIT_OK), text


# --------------------------------------------------------------------------
# Argument parsing
# --------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON experiment file; flags override its entries")
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=int, help="Monte Carlo sample count (0 disables simulation)")
    p.add_argument("--threads", type=int, help="worker threads (default: $CHECKERBOARD_THREADS or 1)")
    p.add_argument("--output", help="write here instead of stdout")
    p.add_argument("--format", choices=("csv", "json"))


def _lattice(p: argparse.ArgumentParser) -> None:
    p.add_argument("--p", help="constant edge probability, e.g. 1/2 or 0.4 (read exactly)")
    p.add_argument("--field", help="constant:P | polya | alternating:LP,LM,EPS | table:FILE.csv")
    p.add_argument("--T", help="observation diagonal")
    p.add_argument("--entrance", type=int, help="diagonal of the maximal entrance law (default 0)")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="checkerboard", description="Coalescing particles on the checkerboard lattice.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("empty-interval", help="Pfaffian, exact and Monte Carlo empty-interval probabilities")
    _common(p)
    _lattice(p)
    p.add_argument("--interval", action="append", help="a:b with half-integer endpoints; repeat for several")
    p.add_argument("--exact", action="store_true", help="also evaluate the lineage oracle")

    p = sub.add_parser("correlate", help="correlation functions by subset sums and by one Pfaffian")
    _common(p)
    _lattice(p)
    p.add_argument("--sites", action="append", help="comma list or range of integer sites; repeat for several sets")

    p = sub.add_parser("kernel-table", help="crossing probabilities over a T x delta grid")
    _common(p)
    p.add_argument("--kind", choices=("biased", "asymmetric", "poisson", "bidirectional", "erfc"))
    p.add_argument("--p")
    p.add_argument("--lam", type=float)
    p.add_argument("--lambda-plus", dest="lambda_plus", type=float)
    p.add_argument("--lambda-minus", dest="lambda_minus", type=float)
    p.add_argument("--T", help="horizon (or time) range such as 1..8")
    p.add_argument("--delta", help="separation range such as 2..8")

    p = sub.add_parser("verify", help="run the cross-validation suite")
    _common(p)
    p.add_argument("--profile", choices=("quick", "full"))

    p = sub.add_parser("simulate", help="dump boundary and lineage trajectories")
    _common(p)
    _lattice(p)
    p.add_argument("--interval", action="append", help="a:b with half-integer endpoints; repeat for several")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if args.command is None and not args.config:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        cfg = build_config(args)
        status, text = run(cfg)
    except (CheckerboardError, ValueError, KeyError, OSError) as exc:
        print(f"checkerboard: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"checkerboard: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    try:
        if cfg.output:
            write_atomic(cfg.output, text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"checkerboard: cannot write output: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return status


if __name__ == "__main__":
    sys.exit(main())
