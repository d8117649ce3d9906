"""Graphical construction: random West/South choices and the two dual forests.

One :class:`ChoiceConfiguration` drives everything.  Forward boundaries on
Z^2 start from the maximal entrance law (every Z^2 vertex of the entrance
diagonal occupied) and move East or North; backward lineages on Z'^2 follow
the West/South arrows down to the entrance diagonal.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from itertools import groupby
from typing import Iterable, Sequence

import numpy as np

from . import _rng
from .errors import ConeNotCovered, SpecError
from .lattice import (
    LatticeVertex,
    WeightField,
    as_half_integer,
    as_integer,
    zprime_index,
    zprime_position,
)

EVENTS = ("empty_interval", "pairwise_coalescence", "total_annihilation")


@dataclass(frozen=True)
class IntervalSpec:
    """Endpoints a_1 < b_1 <= a_2 < b_2 <= ... of Z'^2 vertices on one diagonal.

    ``entrance`` is the diagonal carrying the maximal entrance law; the
    observation happens ``diagonal - entrance`` steps later.
    """

    diagonal: int
    endpoints: tuple
    entrance: int = 0

    def __post_init__(self):
        pts = tuple(as_half_integer(x) for x in self.endpoints)
        object.__setattr__(self, "endpoints", pts)
        object.__setattr__(self, "diagonal", as_integer(self.diagonal))
        if not pts or len(pts) % 2:
            raise SpecError("need an even, nonzero number of endpoints")
        for i in range(0, len(pts), 2):
            if not pts[i] < pts[i + 1]:
                raise SpecError(f"interval {i // 2} is empty: {pts[i]} >= {pts[i + 1]}")
            if i and not pts[i - 1] <= pts[i]:
                raise SpecError("intervals overlap or are out of order")
        if self.entrance > self.diagonal:
            raise SpecError("entrance diagonal lies after the observation diagonal")

    @classmethod
    def from_intervals(cls, diagonal: int, intervals: Iterable[Sequence], entrance: int = 0):
        return cls(diagonal, tuple(x for ab in intervals for x in ab), entrance)

    @property
    def n(self) -> int:
        return len(self.endpoints) // 2

    @property
    def horizon(self) -> int:
        return self.diagonal - self.entrance

    @property
    def intervals(self) -> list[tuple[Fraction, Fraction]]:
        e = self.endpoints
        return [(e[i], e[i + 1]) for i in range(0, len(e), 2)]

    @property
    def indices(self) -> list[int]:
        """Z'^2 indices of the endpoints."""
        return [zprime_index(x) for x in self.endpoints]

    def vertices(self) -> list[LatticeVertex]:
        return [LatticeVertex(x, self.diagonal - x) for x in self.endpoints]


def interval_region(spec: IntervalSpec) -> frozenset:
    """Choice vertices (diagonal, k) that determine every event of ``spec``.

    For each interval (a, b) this is the band k in [k_a - (T - m), k_b] on
    diagonals m = entrance+1 .. T: it holds the backward cones of a and b
    and the forward cone of every boundary that can land inside (a, b).
    """
    T, e = spec.diagonal, spec.entrance
    region = set()
    ks = spec.indices
    for i in range(0, len(ks), 2):
        ka, kb = ks[i], ks[i + 1]
        for m in range(e + 1, T + 1):
            region.update((m, k) for k in range(ka - (T - m), kb + 1))
    return frozenset(region)


def hull_region(spec: IntervalSpec) -> frozenset:
    """Like :func:`interval_region` but for the single interval (a_1, b_n)."""
    ks = spec.indices
    T = spec.diagonal
    return frozenset(
        (m, k) for m in range(spec.entrance + 1, T + 1) for k in range(ks[0] - (T - m), ks[-1] + 1)
    )


class ChoiceConfiguration:
    """West/South choices on a finite set of Z'^2 vertices.

    ``west[(diagonal, k)]`` is True when the vertex copies from the West
    (its Z^2 partner then has a forward East edge).
    """

    def __init__(self, west: dict, seed: int | None = None, sample: int = 0):
        self.west = dict(west)
        self.seed = seed
        self.sample = sample

    @property
    def region(self) -> frozenset:
        return frozenset(self.west)

    def vertices(self) -> list[LatticeVertex]:
        return sorted(LatticeVertex.zprime(n, k) for n, k in self.west)

    def choice(self, vertex: LatticeVertex) -> str:
        """'W' or 'S' at a Z'^2 vertex."""
        return "W" if self.is_west(vertex.diagonal, vertex.index) else "S"

    def is_west(self, diagonal: int, k: int) -> bool:
        try:
            return self.west[(diagonal, k)]
        except KeyError:
            raise ConeNotCovered(f"no choice at diagonal {diagonal}, index {k}") from None

    def __len__(self):
        return len(self.west)


def _region_keys(region) -> list[tuple[int, int]]:
    keys = []
    for r in region:
        if isinstance(r, LatticeVertex):
            if not r.is_half:
                raise SpecError(f"{r} is not a Z'^2 vertex")
            keys.append((r.diagonal, r.index))
        else:
            keys.append((int(r[0]), int(r[1])))
    return sorted(keys)


def sample_choices(field: WeightField, region, seed: int, sample: int = 0) -> ChoiceConfiguration:
    """Draw independent West/South choices on ``region``.

    Each choice is a pure function of (seed, sample, vertex): the same vertex
    gets the same choice whatever region it is drawn in.
    """
    keys = _region_keys(region)
    if not keys:
        return ChoiceConfiguration({}, seed, sample)
    d = np.fromiter((n for n, _ in keys), dtype=np.int64, count=len(keys))
    k = np.fromiter((k for _, k in keys), dtype=np.int64, count=len(keys))
    p = field.weights_float(k, d - 1 - k)
    west = _rng.uniforms(seed, sample, d, k) < p
    return ChoiceConfiguration(dict(zip(keys, west.tolist())), seed, sample)


def forward_trajectory(choices: ChoiceConfiguration, window, T: int, entrance: int = 0):
    """Boundary positions on every diagonal from ``entrance`` to ``T``.

    ``window = (w0, w1)`` is the inclusive range of Z^2 positions (u values)
    occupied on the entrance diagonal.  Only positions whose fate is fixed by
    the window are reported: on diagonal n that is [w0 + (n - entrance), w1].
    """
    w0, w1 = (as_integer(w) for w in window)
    current = list(range(w0, w1 + 1))
    out = [current]
    for n in range(entrance, T):
        lo = w0 + (n + 1 - entrance)
        nxt = set()
        for w in current:
            w2 = w + 1 if choices.is_west(n + 1, w) else w
            if lo <= w2 <= w1:
                nxt.add(w2)
        current = sorted(nxt)
        out.append(current)
    return out


def forward_boundaries(choices: ChoiceConfiguration, window, T: int, entrance: int = 0) -> list[int]:
    """Surviving boundary positions on diagonal ``T`` (see :func:`forward_trajectory`)."""
    return forward_trajectory(choices, window, T, entrance)[-1]


@dataclass(frozen=True)
class BackwardLineage:
    start: LatticeVertex
    path: tuple

    @property
    def end(self) -> LatticeVertex:
        return self.path[-1]


def backward_lineage(choices: ChoiceConfiguration, start: LatticeVertex, steps: int) -> BackwardLineage:
    n, k = start.diagonal, start.index
    if not start.is_half:
        raise SpecError(f"{start} is not a Z'^2 vertex")
    path = [start]
    for _ in range(steps):
        if choices.is_west(n, k):
            k -= 1
        n -= 1
        path.append(LatticeVertex.zprime(n, k))
    return BackwardLineage(start, tuple(path))


def _lineage_ends(choices: ChoiceConfiguration, T: int, ks: Sequence[int], steps: int) -> list[int]:
    ends = []
    for k in ks:
        for n in range(T, T - steps, -1):
            if choices.is_west(n, k):
                k -= 1
        ends.append(k)
    return ends


def pairwise_coalescence(choices: ChoiceConfiguration, spec: IntervalSpec) -> bool:
    """Every pair (a_i, b_i) of lineages shares a vertex by the entrance diagonal."""
    ends = _lineage_ends(choices, spec.diagonal, spec.indices, spec.horizon)
    return all(ends[i] == ends[i + 1] for i in range(0, len(ends), 2))


def cluster_sizes(positions: Sequence[int]) -> list[int]:
    """Sizes of runs of equal consecutive positions."""
    return [len(list(g)) for _, g in groupby(positions)]


def total_annihilation(choices: ChoiceConfiguration, spec: IntervalSpec) -> bool:
    """Every cluster of coalesced lineages has even size (all mod-2 labels vanish)."""
    ends = _lineage_ends(choices, spec.diagonal, spec.indices, spec.horizon)
    return all(s % 2 == 0 for s in cluster_sizes(ends))


def empty_interval_indicator(choices: ChoiceConfiguration, spec: IntervalSpec, window=None) -> bool:
    """No forward boundary strictly inside any (a_i, b_i) on the observation diagonal.

    Without ``window`` each interval is evolved from its own minimal window
    [k_a + 1 - horizon, k_b].
    """
    T, e = spec.diagonal, spec.entrance
    ks = spec.indices
    for i in range(0, len(ks), 2):
        lo, hi = ks[i] + 1, ks[i + 1]  # Z^2 sites strictly inside
        win = window if window is not None else (lo - spec.horizon, hi)
        if win[0] + spec.horizon > lo or win[1] < hi:
            raise ConeNotCovered("window does not determine the interval")
        survivors = forward_boundaries(choices, win, T, e)
        if any(lo <= w <= hi for w in survivors):
            return False
    return True


def event_indicator(choices: ChoiceConfiguration, spec: IntervalSpec, event: str) -> bool:
    if event == "empty_interval":
        return empty_interval_indicator(choices, spec)
    if event == "pairwise_coalescence":
        return pairwise_coalescence(choices, spec)
    if event == "total_annihilation":
        return total_annihilation(choices, spec)
    raise ValueError(f"unknown event {event!r}")


def trajectories_csv(choices: ChoiceConfiguration, spec: IntervalSpec) -> str:
    """CSV of (kind, diagonal, position) for boundaries and lineages of ``spec``."""
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["kind", "id", "diagonal", "position"])
    ks = spec.indices
    win = (ks[0] + 1 - spec.horizon, ks[-1])
    for off, row in enumerate(forward_trajectory(choices, win, spec.diagonal, spec.entrance)):
        for w in row:
            wr.writerow(["boundary", "", spec.entrance + off, w])
    for i, v in enumerate(spec.vertices()):
        for p in backward_lineage(choices, v, spec.horizon).path:
            wr.writerow(["lineage", i, p.diagonal, str(zprime_position(p.index))])
    return buf.getvalue()
