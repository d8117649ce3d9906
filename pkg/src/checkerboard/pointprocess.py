"""Gap probabilities, correlation functions and the 2x2 difference kernel."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable

import numpy as np

from .errors import SizeCap, SpecError
from .forests import IntervalSpec
from .kernels import KernelSpec, format_number
from .lattice import as_integer
from .pfaffian import AntisymmetricMatrix, empty_interval_probability, pfaffian

MOBIUS_CAP = 20


@dataclass(frozen=True)
class SiteSet:
    """Strictly increasing Z^2 positions (u values) on one diagonal."""

    diagonal: int
    sites: tuple
    entrance: int = 0

    def __post_init__(self):
        sites = tuple(as_integer(y) for y in self.sites)
        object.__setattr__(self, "sites", sites)
        if not sites:
            raise SpecError("empty site set")
        if any(a >= b for a, b in zip(sites, sites[1:])):
            raise SpecError("sites must be strictly increasing")

    def subset(self, sites: Iterable[int]) -> "SiteSet":
        return SiteSet(self.diagonal, tuple(sites), self.entrance)

    def __len__(self):
        return len(self.sites)


def site_intervals(sites, merge_clusters: bool = True) -> list[tuple[Fraction, Fraction]]:
    """Unit intervals (y - 1/2, y + 1/2), merged over runs of consecutive sites.

    With ``merge_clusters=False`` every site keeps its own unit interval and
    neighbouring sites give touching intervals.
    """
    half = Fraction(1, 2)
    out = []
    for y in sites:
        if merge_clusters and out and out[-1][1] == y - half:
            out[-1] = (out[-1][0], y + half)
        else:
            out.append((y - half, y + half))
    return out


def gap_probability(kernel: KernelSpec, S: SiteSet | None, merge_clusters: bool = True):
    """Probability that no particle occupies any site of ``S`` (1 for the empty set)."""
    if S is None or not S.sites:
        return Fraction(1) if kernel.exact else 1.0
    spec = IntervalSpec.from_intervals(S.diagonal, site_intervals(S.sites, merge_clusters), S.entrance)
    return empty_interval_probability(kernel, spec)


def alternating_subset_sums(values: Callable[[tuple], object], ground: tuple) -> dict:
    """f(S) = sum_{T subset S} (-1)^{|T|} values(T) for every subset S of ``ground``.

    The transform is its own inverse: applying it to f returns ``values``.
    """
    g = {}
    for r in range(len(ground) + 1):
        for sub in combinations(ground, r):
            g[sub] = values(sub)
    out = {}
    for sub in g:
        total = 0
        for r in range(len(sub) + 1):
            for t in combinations(sub, r):
                total += -g[t] if r % 2 else g[t]
        out[sub] = total
    return out


def correlation_mobius(kernel: KernelSpec, sites: SiteSet):
    """rho(T) = sum_{S subset T} (-1)^{|S|} G(S) with Pfaffian gap probabilities."""
    n = len(sites.sites)
    if n > MOBIUS_CAP:
        raise SizeCap(f"{n} sites exceed the subset-sum cap of {MOBIUS_CAP}")
    total = 0
    for r in range(n + 1):
        for sub in combinations(sites.sites, r):
            g = gap_probability(kernel, sites.subset(sub) if sub else None)
            total += -g if r % 2 else g
    return total


class _CrossingTable:
    """C(y, z) = A(y - 1/2, z - 1/2), extended antisymmetrically, memoised."""

    def __init__(self, kernel: KernelSpec):
        self.kernel = kernel
        self.cache = {}

    def __call__(self, y, z):
        key = (y, z)
        if key not in self.cache:
            half = Fraction(1, 2)
            if y <= z:
                val = self.kernel.crossing(y - half, z - half)
            else:
                val = -self.kernel.crossing(z - half, y - half)
            self.cache[key] = val
        return self.cache[key]


def difference_kernel(kernel: KernelSpec, y: int, z: int, _table=None) -> np.ndarray:
    """K(y, z) = [[C, -D_z C], [-D_y C, D_y D_z C]] with forward differences D."""
    C = _table or _CrossingTable(kernel)
    c = C(y, z)
    c_y = C(y + 1, z)
    c_z = C(y, z + 1)
    c_yz = C(y + 1, z + 1)
    return np.array(
        [[c, -(c_z - c)], [-(c_y - c), c_yz - c_y - c_z + c]],
        dtype=object if kernel.exact else float,
    )


def correlation_matrix(kernel: KernelSpec, sites: SiteSet) -> AntisymmetricMatrix:
    """2n x 2n matrix with blocks K(y_i, y_j) above the diagonal.

    Row pair (2i, 2i+1) belongs to site y_i.  Diagonal blocks contribute only
    their (1, 2) entry; the lower triangle is fixed by antisymmetry.
    """
    ys = sites.sites
    table = _CrossingTable(kernel)
    blocks = {}
    for i, yi in enumerate(ys):
        for j in range(i, len(ys)):
            blocks[i, j] = difference_kernel(kernel, yi, ys[j], table)

    def upper(k, l):
        i, a = divmod(k, 2)
        j, b = divmod(l, 2)
        return blocks[i, j][a, b]

    return AntisymmetricMatrix.from_upper(2 * len(ys), upper)


def correlation_pfaffian(kernel: KernelSpec, sites: SiteSet):
    """rho_n(y_1..y_n) as a single Pfaffian of the difference kernel."""
    return pfaffian(correlation_matrix(kernel, sites))


def correlation_table_csv(rows) -> str:
    """Rows of (sites, rho_mobius, rho_pfaffian, mc_estimate, mc_stderr)."""
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["sites", "rho_mobius", "rho_pfaffian", "mc_estimate", "mc_stderr"])
    for sites, rm, rp, mc, se in rows:
        wr.writerow(
            [
                " ".join(str(y) for y in sites),
                format_number(rm),
                format_number(rp),
                "" if mc is None else format_number(mc),
                "" if se is None else format_number(se),
            ]
        )
    return buf.getvalue()
