"""Exact rational oracles built straight from the graphical construction.

Two independent routes:

* brute force over every West/South assignment of the choice region
  (``enumerate_event_probability``), evaluating the forward and backward
  forests on each assignment;
* a dynamic program over joint coalescing lineages (``lineage_dp``).

Both return :class:`fractions.Fraction` values; nothing here is approximate.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import prod
from typing import Iterable, Sequence

import numpy as np

from .errors import ConeTooLarge, InexactWeights, SpecError
from .forests import EVENTS, IntervalSpec, interval_region
from .lattice import WeightField, choice_weight, zprime_index, zprime_position

MAX_BITS = 24
_CHUNK = 1 << 20


# --------------------------------------------------------------------------
# Brute-force enumeration
# --------------------------------------------------------------------------

class _Enumerator:
    """Shared state for enumerating all choice assignments of one region."""

    def __init__(self, field: WeightField, region, cap: int):
        self.keys = sorted(region)
        self.m = len(self.keys)
        if self.m > cap:
            raise ConeTooLarge(f"{self.m} choice bits exceed the cap of {cap}")
        self.bit = {key: j for j, key in enumerate(self.keys)}
        weights = [field.exact_weight(k, n - 1 - k) for n, k in self.keys]
        self._group_weights(weights)

    def _group_weights(self, weights):
        # Configurations are weighted through the number of West choices in
        # each group of equal-weight vertices.
        values = sorted(set(weights))
        self.groups = []
        for w in values:
            mask = 0
            size = 0
            for j, wj in enumerate(weights):
                if wj == w:
                    mask |= 1 << j
                    size += 1
            self.groups.append((w, mask, size))
        self.radix = []
        r = 1
        for _, _, size in self.groups:
            self.radix.append(r)
            r *= size + 1
        self.n_keys = r
        denom = prod(w.denominator ** size for w, _, size in self.groups)
        nums = []
        for key in range(self.n_keys):
            num = 1
            rest = key
            for (w, _, size), rad in zip(self.groups, self.radix):
                west = rest % (size + 1)
                rest //= size + 1
                num *= (w.numerator ** west) * ((w.denominator - w.numerator) ** (size - west))
            nums.append(num)
        self.key_numerators = nums
        self.denominator = denom

    def chunks(self):
        total = 1 << self.m
        for start in range(0, total, _CHUNK):
            c = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
            bits = ((c[:, None] >> np.arange(self.m, dtype=np.int64)) & 1).astype(bool)
            key = np.zeros(c.shape, dtype=np.int64)
            for (_, mask, _), rad in zip(self.groups, self.radix):
                key += np.bitwise_count(c & np.int64(mask)).astype(np.int64) * rad
            yield c, bits, key

    def probability(self, counts: np.ndarray) -> Fraction:
        num = sum(int(cnt) * w for cnt, w in zip(counts, self.key_numerators) if cnt)
        return Fraction(num, self.denominator)


def _lineage_ends(en: _Enumerator, configs, T: int, steps: int, k0: int) -> np.ndarray:
    """Backward lineage from index k0, reading choices from packed configurations."""
    pos = np.full(configs.shape[0], k0, dtype=np.int64)
    for n in range(T, T - steps, -1):
        lo = k0 - (T - n)
        table = np.array([en.bit[(n, k)] for k in range(lo, k0 + 1)], dtype=np.int64)
        pos = pos - ((configs >> table[pos - lo]) & 1)
    return pos


def _forward_occupancy(en: _Enumerator, bits, T: int, entrance: int, w0: int, w1: int):
    """Boolean occupancy columns for sites [w0 + horizon, w1] on diagonal T."""
    n_cfg = bits.shape[0]
    occ = {w: np.ones(n_cfg, dtype=bool) for w in range(w0, w1 + 1)}
    for n in range(entrance, T):
        lo = w0 + (n + 1 - entrance)
        west = {w: bits[:, en.bit[(n + 1, w)]] for w in occ}
        nxt = {}
        for w in range(lo, w1 + 1):
            from_left = occ[w - 1] & west[w - 1] if (w - 1) in occ else False
            stay = occ[w] & ~west[w] if w in occ else False
            nxt[w] = from_left | stay
        occ = nxt
    return occ


def _even_clusters(links: Sequence[np.ndarray]) -> np.ndarray:
    """All runs of linked neighbours have even length.

    ``links[j]`` says whether particles j and j + 1 share a cluster.  The
    parity of the current run is toggled as it grows.
    """
    ok = np.ones(links[0].shape, dtype=bool) if links else np.zeros((), dtype=bool)
    odd = np.ones_like(ok)
    for same in links:
        ok &= same | ~odd
        odd = ~(same & odd)
    return ok & ~odd


def _annihilated(ends: Sequence[np.ndarray]) -> np.ndarray:
    return _even_clusters([cur == prev for prev, cur in zip(ends, ends[1:])])


def enumerate_event_probabilities(
    field: WeightField,
    specs: Sequence[IntervalSpec],
    events: Iterable[str] = EVENTS,
    cap: int = MAX_BITS,
) -> dict:
    """Exact probabilities of ``events`` for every spec, from one enumeration.

    All specs must share the observation and entrance diagonals.  The
    enumeration runs over the union of their choice regions, so every value
    comes from the same set of weighted configurations.  Returns a dict
    keyed by ``(spec_index, event)``.
    """
    specs = list(specs)
    events = list(events)
    for ev in events:
        if ev not in EVENTS:
            raise ValueError(f"unknown event {ev!r}")
    T, e = specs[0].diagonal, specs[0].entrance
    if any(s.diagonal != T or s.entrance != e for s in specs):
        raise SpecError("specs must share their diagonals")
    region = frozenset().union(*(interval_region(s) for s in specs))
    h = T - e
    en = _Enumerator(field, region, cap)

    intervals = sorted({(s.indices[i], s.indices[i + 1]) for s in specs for i in range(0, 2 * s.n, 2)})
    windows = _merge_windows(intervals, region, T, e)
    starts = sorted({k for s in specs for k in s.indices})
    counts = defaultdict(lambda: np.zeros(en.n_keys, dtype=np.int64))

    for configs, bits, key in en.chunks():
        if h == 0:
            ends = {k: np.full(bits.shape[0], k) for k in starts}
            occ = {}
            for ka, kb in intervals:
                for w in range(ka + 1, kb + 1):
                    occ[w] = np.ones(bits.shape[0], dtype=bool)
        else:
            ends = {k: _lineage_ends(en, configs, T, h, k) for k in starts}
            occ = {}
            for lo, hi in windows:
                occ.update(_forward_occupancy(en, bits, T, e, lo + 1 - h, hi))
        empty = {}
        for ka, kb in intervals:
            any_b = np.zeros(bits.shape[0], dtype=bool)
            for w in range(ka + 1, kb + 1):
                any_b |= occ[w]
            empty[(ka, kb)] = ~any_b
        met = {}

        def linked(a, b):
            if (a, b) not in met:
                met[(a, b)] = ends[a] == ends[b]
            return met[(a, b)]

        for i, s in enumerate(specs):
            ks = s.indices
            pairs = [(ks[j], ks[j + 1]) for j in range(0, len(ks), 2)]
            for ev in events:
                if ev == "empty_interval":
                    ind = np.logical_and.reduce([empty[p] for p in pairs])
                elif ev == "pairwise_coalescence":
                    ind = np.logical_and.reduce([linked(a, b) for a, b in pairs])
                else:
                    ind = _even_clusters([linked(a, b) for a, b in zip(ks, ks[1:])])
                counts[(i, ev)] += np.bincount(key[ind], minlength=en.n_keys)
    return {k: en.probability(v) for k, v in counts.items()}


def _merge_windows(intervals, region, T, e):
    """Group intervals whose combined band is inside ``region`` (one forward pass each)."""

    def band(ka, kb):
        return {(m, k) for m in range(e + 1, T + 1) for k in range(ka - (T - m), kb + 1)}

    windows = []
    for ka, kb in intervals:
        if windows:
            la, lb = windows[-1]
            if band(la, max(lb, kb)) <= region:
                windows[-1] = (la, max(lb, kb))
                continue
        windows.append((ka, kb))
    return windows


def enumerate_event_probability(field: WeightField, spec: IntervalSpec, event: str, cap: int = MAX_BITS) -> Fraction:
    """Exact probability of one event by summing over all 2^m choice assignments."""
    return enumerate_event_probabilities(field, [spec], [event], cap)[(0, event)]


def choice_bits(spec: IntervalSpec) -> int:
    """Number of choice vertices the enumeration of ``spec`` ranges over."""
    return len(interval_region(spec))


# --------------------------------------------------------------------------
# Lineage dynamic program
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LineageConfiguration:
    """Distinct lineage positions with the number of original particles at each."""

    positions: tuple
    cluster_sizes: tuple

    def clusters(self) -> list[range]:
        out, first = [], 0
        for s in self.cluster_sizes:
            out.append(range(first, first + s))
            first += s
        return out

    def cluster_of(self) -> list[int]:
        return [c for c, s in enumerate(self.cluster_sizes) for _ in range(s)]

    def pairs_coalesced(self) -> bool:
        """Particles (0, 1), (2, 3), ... each share a cluster."""
        owner = self.cluster_of()
        return all(owner[i] == owner[i + 1] for i in range(0, len(owner), 2))

    def all_even(self) -> bool:
        return all(s % 2 == 0 for s in self.cluster_sizes)


def _canonical(ks, sizes):
    out_k, out_s = [], []
    for k, s in zip(ks, sizes):
        if out_k and out_k[-1] == k:
            out_s[-1] += s
        else:
            out_k.append(k)
            out_s.append(s)
    return tuple(out_k), tuple(out_s)


def _check_exact(field: WeightField):
    if not field.exact:
        raise InexactWeights("exact oracles need rational weights")


def lineage_dp(field: WeightField, T: int, starts: Sequence, horizon: int) -> dict:
    """Exact law of the coalescing lineages from ``starts`` after ``horizon`` steps.

    ``starts`` are Z'^2 u-coordinates on diagonal ``T`` in weakly increasing
    order.  Lineages at distinct vertices use distinct choices, so they move
    independently; colocated lineages move as one.
    """
    _check_exact(field)
    ks = [zprime_index(x) for x in starts]
    if any(a > b for a, b in zip(ks, ks[1:])):
        raise SpecError("starts must be weakly increasing")
    if not 0 <= horizon:
        raise SpecError("negative horizon")
    state = {_canonical(ks, [1] * len(ks)): Fraction(1)}
    for step in range(horizon):
        n = T - step
        nxt = defaultdict(Fraction)
        for (pos, sizes), mass in state.items():
            ps = [choice_weight(field, n, k) for k in pos]
            for moves in product((True, False), repeat=len(pos)):
                w = mass
                new = []
                for k, p, west in zip(pos, ps, moves):
                    if west:
                        w *= p
                        new.append(k - 1)
                    else:
                        w *= 1 - p
                        new.append(k)
                if w:
                    nxt[_canonical(new, sizes)] += w
        state = nxt
    return {
        LineageConfiguration(tuple(zprime_position(k) for k in pos), sizes): mass
        for (pos, sizes), mass in state.items()
    }


def lineage_event_probability(field: WeightField, spec: IntervalSpec, event: str = "pairwise_coalescence") -> Fraction:
    """Pairwise-coalescence or total-annihilation probability via :func:`lineage_dp`."""
    dist = lineage_dp(field, spec.diagonal, spec.endpoints, spec.horizon)
    if event == "pairwise_coalescence":
        test = LineageConfiguration.pairs_coalesced
    elif event == "total_annihilation":
        test = LineageConfiguration.all_even
    else:
        raise ValueError(f"lineage DP cannot evaluate {event!r}")
    return sum((m for cfg, m in dist.items() if test(cfg)), Fraction(0))


def backward_transition_weights(field: WeightField, T: int, start, steps: int) -> dict:
    """Exact law of one backward lineage from ``start`` (a u-coordinate on diagonal T)."""
    _check_exact(field)
    dist = {zprime_index(start): Fraction(1)}
    for step in range(steps):
        n = T - step
        nxt = defaultdict(Fraction)
        for k, mass in dist.items():
            p = choice_weight(field, n, k)
            if p:
                nxt[k - 1] += mass * p
            if p != 1:
                nxt[k] += mass * (1 - p)
        dist = nxt
    return {zprime_position(k): m for k, m in sorted(dist.items())}
