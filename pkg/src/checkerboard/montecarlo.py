"""Monte Carlo estimates of empty-interval and correlation events.

Samples are simulated in fixed-size shards, vectorised over the shard.  The
choice at a vertex of sample ``i`` is the same hashed coin that
:func:`checkerboard.forests.sample_choices` draws for ``sample=i``, so any
sample can be replayed one at a time through the forests module.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _rng
from .errors import SpecError
from .exact import _annihilated, lineage_event_probability
from .forests import EVENTS, IntervalSpec
from .kernels import KernelSpec, format_number
from .lattice import WeightField
from .pfaffian import empty_interval_probability

SHARD = 1 << 14
THREADS_ENV = "CHECKERBOARD_THREADS"
Z_FLAG = 4.0


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class EstimatorResult:
    mean: float
    stderr: float
    samples: int
    seed: int
    event: str
    successes: int = 0

    @classmethod
    def from_count(cls, successes: int, samples: int, seed: int, event: str) -> "EstimatorResult":
        mean = successes / samples
        return cls(mean, math.sqrt(mean * (1.0 - mean) / samples), samples, seed, event, successes)


# --------------------------------------------------------------------------
# Vectorised simulation of one shard
# --------------------------------------------------------------------------

def _west(field: WeightField, seed: int, samples, n: int, k):
    p = field.weights_float(k, n - 1 - np.asarray(k))
    return _rng.uniforms(seed, samples, n, k) < p


def _forward_occupancy(field, seed, samples, T, entrance, w0, w1) -> np.ndarray:
    """Occupancy of sites [w0 + horizon, w1] on diagonal T, shape (N, width)."""
    occ = np.ones((samples.size, w1 - w0 + 1), dtype=bool)
    smp = samples[:, None]
    for n in range(entrance, T):
        lo = w0 + (n - entrance)
        cols = np.arange(lo, w1 + 1)
        west = _west(field, seed, smp, n + 1, cols[None, :])
        occ = (occ[:, :-1] & west[:, :-1]) | (occ[:, 1:] & ~west[:, 1:])
    return occ


def _lineage_end(field, seed, samples, T, steps, k0) -> np.ndarray:
    pos = np.full(samples.size, k0, dtype=np.int64)
    for n in range(T, T - steps, -1):
        pos -= _west(field, seed, samples, n, pos)
    return pos


def event_indicators(field: WeightField, spec: IntervalSpec, samples, seed: int, events=EVENTS) -> dict:
    """Per-sample indicator arrays for the requested events."""
    samples = np.asarray(samples, dtype=np.int64)
    T, e, h = spec.diagonal, spec.entrance, spec.horizon
    ks = spec.indices
    out = {}
    if "empty_interval" in events:
        ind = np.ones(samples.size, dtype=bool)
        for i in range(0, len(ks), 2):
            lo, hi = ks[i] + 1, ks[i + 1]
            occ = _forward_occupancy(field, seed, samples, T, e, lo - h, hi)
            ind &= ~occ.any(axis=1)
        out["empty_interval"] = ind
    if "pairwise_coalescence" in events or "total_annihilation" in events:
        cache = {}
        for k in ks:
            if k not in cache:
                cache[k] = _lineage_end(field, seed, samples, T, h, k)
        ends = [cache[k] for k in ks]
        if "pairwise_coalescence" in events:
            out["pairwise_coalescence"] = np.logical_and.reduce(
                [ends[i] == ends[i + 1] for i in range(0, len(ends), 2)]
            )
        if "total_annihilation" in events:
            out["total_annihilation"] = _annihilated(ends)
    return out


def occupancy_indicator(field: WeightField, sites, samples, seed: int) -> np.ndarray:
    """All sites of a SiteSet occupied by boundaries, per sample."""
    samples = np.asarray(samples, dtype=np.int64)
    ys = sites.sites
    h = sites.diagonal - sites.entrance
    occ = _forward_occupancy(field, seed, samples, sites.diagonal, sites.entrance, ys[0] - h, ys[-1])
    idx = np.array(ys) - ys[0]
    return occ[:, idx].all(axis=1)


def _sharded_count(count_shard, samples: int, threads: int | None) -> int:
    if samples < 1:
        raise SpecError("need at least one sample")
    bounds = [(s, min(samples, s + SHARD)) for s in range(0, samples, SHARD)]
    threads = threads or default_threads()
    if threads == 1 or len(bounds) == 1:
        return sum(count_shard(np.arange(a, b)) for a, b in bounds)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return sum(pool.map(lambda ab: count_shard(np.arange(*ab)), bounds))


def estimate_event(
    field: WeightField,
    spec: IntervalSpec,
    event: str,
    samples: int,
    seed: int,
    threads: int | None = None,
) -> EstimatorResult:
    """Bernoulli estimate of one event over ``samples`` independent configurations."""
    if event not in EVENTS:
        raise ValueError(f"unknown event {event!r}")

    def count(idx):
        return int(event_indicators(field, spec, idx, seed, (event,))[event].sum())

    return EstimatorResult.from_count(_sharded_count(count, samples, threads), samples, seed, event)


def estimate_correlation(field: WeightField, sites, samples: int, seed: int, threads: int | None = None) -> EstimatorResult:
    """Estimate rho(sites): every site carries a boundary on the observation diagonal."""

    def count(idx):
        return int(occupancy_indicator(field, sites, idx, seed).sum())

    label = "occupied " + " ".join(str(y) for y in sites.sites)
    return EstimatorResult.from_count(_sharded_count(count, samples, threads), samples, seed, label)


# --------------------------------------------------------------------------
# Verification report
# --------------------------------------------------------------------------

def default_kernel(field: WeightField, spec: IntervalSpec) -> KernelSpec:
    """Closed-form kernel for constant fields, the environment DP otherwise."""
    if field.kind == "constant" and 0 < field.params["p"] < 1:
        return KernelSpec.biased(field.params["p"], spec.horizon)
    return KernelSpec.inhomogeneous(field, spec.diagonal, spec.horizon)


@dataclass
class ReportRow:
    spec: IntervalSpec
    exact: Fraction | None
    pfaffian: object
    mc_mean: float | None
    mc_stderr: float | None
    samples: int
    z: float

    @property
    def flagged(self) -> bool:
        return abs(self.z) > Z_FLAG

    @property
    def exact_minus_pfaffian(self):
        if self.exact is None or self.pfaffian is None:
            return None
        return self.exact - self.pfaffian


@dataclass
class Report:
    rows: list
    seed: int
    samples: int
    meta: dict = dc_field(default_factory=dict)

    @property
    def flagged(self) -> bool:
        return any(r.flagged for r in self.rows)

    COLUMNS = ("diagonal", "entrance", "endpoints", "exact", "pfaffian", "exact_minus_pfaffian",
               "mc_mean", "mc_stderr", "samples", "z", "flag")

    def records(self) -> list[dict]:
        out = []
        for r in self.rows:
            out.append(
                {
                    "diagonal": r.spec.diagonal,
                    "entrance": r.spec.entrance,
                    "endpoints": " ".join(str(x) for x in r.spec.endpoints),
                    "exact": "" if r.exact is None else format_number(r.exact),
                    "pfaffian": "" if r.pfaffian is None else format_number(r.pfaffian),
                    "exact_minus_pfaffian": ""
                    if r.exact_minus_pfaffian is None
                    else format_number(r.exact_minus_pfaffian),
                    "mc_mean": "" if r.mc_mean is None else format_number(r.mc_mean),
                    "mc_stderr": "" if r.mc_stderr is None else format_number(r.mc_stderr),
                    "samples": r.samples,
                    "z": "" if r.mc_mean is None else format_number(r.z),
                    "flag": int(r.flagged),
                }
            )
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.DictWriter(buf, fieldnames=self.COLUMNS, lineterminator="\n")
        wr.writeheader()
        wr.writerows(self.records())
        return buf.getvalue()

    def to_json(self) -> str:
        meta = {"seed": self.seed, "samples": self.samples}
        meta.update(self.meta)
        return json.dumps({"meta": meta, "rows": self.records()}, indent=2)


def _z_score(mean: float, stderr: float, reference) -> float:
    diff = mean - float(reference)
    if stderr == 0.0:
        return 0.0 if abs(diff) < 1e-12 else math.copysign(math.inf, diff)
    return diff / stderr


def verification_report(
    field: WeightField,
    specs: Sequence[IntervalSpec],
    kernels=None,
    samples: int = 100_000,
    seed: int = 0,
    threads: int | None = None,
    exact_lineage_limit: int = 16,
) -> Report:
    """Exact value (when affordable), Pfaffian value and MC estimate for each spec.

    ``kernels`` is one KernelSpec, a list aligned with ``specs``, or None to
    use :func:`default_kernel`.  ``samples=0`` skips the simulation.  Rows
    whose |z| exceeds 4 are flagged.
    """
    start = time.perf_counter()
    rows = []
    for i, spec in enumerate(specs):
        if kernels is None:
            kernel = default_kernel(field, spec)
        elif isinstance(kernels, KernelSpec):
            kernel = kernels
        else:
            kernel = kernels[i]
        exact = None
        if field.exact and spec.horizon <= exact_lineage_limit and spec.n <= 3:
            exact = lineage_event_probability(field, spec, "pairwise_coalescence")
        pf = empty_interval_probability(kernel, spec)
        if samples:
            mc = estimate_event(field, spec, "empty_interval", samples, seed, threads)
            rows.append(ReportRow(spec, exact, pf, mc.mean, mc.stderr, samples, _z_score(mc.mean, mc.stderr, pf)))
        else:
            rows.append(ReportRow(spec, exact, pf, None, None, 0, 0.0))
    meta = {"field": field.describe(), "wall_time_s": round(time.perf_counter() - start, 3)}
    return Report(rows, seed, samples, meta)
