"""Checkerboard lattice geometry: vertices, weight fields, coordinates, cones.

The plane carries two interleaved lattices: Z^2 (integer u, v) and
Z'^2 = (Z + 1/2)^2.  Both live on the diagonals u + v = n with n an integer;
along a diagonal the vertices are ordered by u.

Internally a Z'^2 vertex on diagonal n is addressed by the integer index
k = u - 1/2 and a Z^2 vertex by k = u.  With that convention

* the backward step from Z'^2 (n, k) goes West to (n - 1, k - 1) or South
  to (n - 1, k);
* the random choice at Z'^2 (n, k) is weighted by p at the Z^2 vertex
  (k, n - 1 - k), which also decides whether the boundary sitting on that
  Z^2 vertex moves East (to index k + 1) or North (stays at k).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    EmptyEndpoints,
    InexactWeights,
    OutOfDomain,
    ParityError,
    PolyaAtBoundary,
    SpecError,
    WeightOutOfRange,
)

HALF = Fraction(1, 2)


def as_half_integer(x) -> Fraction:
    """Return ``x`` as an exact half-integer, rejecting anything else."""
    f = Fraction(x)
    if f.denominator != 2:
        raise ParityError(f"{x!r} is not a half-integer")
    return f


def as_integer(x) -> int:
    f = Fraction(x)
    if f.denominator != 1:
        raise ParityError(f"{x!r} is not an integer")
    return int(f)


def zprime_index(u) -> int:
    """Index of the Z'^2 vertex with u-coordinate ``u`` (u - 1/2)."""
    return int(as_half_integer(u) - HALF)


def zprime_position(k: int) -> Fraction:
    return Fraction(2 * k + 1, 2)


def _as_probability(x):
    """Normalise a probability parameter: rationals stay exact, floats stay floats."""
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, bool):
        raise TypeError("probability cannot be a bool")
    if isinstance(x, Rational):
        return Fraction(x)
    return float(x)


class LatticeVertex:
    """A vertex of Z^2 or Z'^2, stored as doubled integer coordinates."""

    __slots__ = ("twice_u", "twice_v")

    def __init__(self, u, v):
        tu, tv = Fraction(u) * 2, Fraction(v) * 2
        if tu.denominator != 1 or tv.denominator != 1:
            raise ParityError(f"({u}, {v}) is not on Z^2 or Z'^2")
        tu, tv = int(tu), int(tv)
        if (tu - tv) % 2:
            raise ParityError(f"({u}, {v}) mixes integer and half-integer coordinates")
        object.__setattr__(self, "twice_u", tu)
        object.__setattr__(self, "twice_v", tv)

    def __setattr__(self, name, value):
        raise AttributeError("LatticeVertex is immutable")

    @classmethod
    def zprime(cls, diagonal: int, k: int) -> "LatticeVertex":
        """Z'^2 vertex with index ``k`` on ``diagonal``."""
        u = zprime_position(k)
        return cls(u, diagonal - u)

    @property
    def u(self) -> Fraction:
        return Fraction(self.twice_u, 2)

    @property
    def v(self) -> Fraction:
        return Fraction(self.twice_v, 2)

    @property
    def diagonal(self) -> int:
        return (self.twice_u + self.twice_v) // 2

    @property
    def is_half(self) -> bool:
        """True on Z'^2."""
        return self.twice_u % 2 == 1

    @property
    def index(self) -> int:
        """Linear index along the diagonal (see module docstring)."""
        return self.twice_u // 2

    def __eq__(self, other):
        if not isinstance(other, LatticeVertex):
            return NotImplemented
        return self.twice_u == other.twice_u and self.twice_v == other.twice_v

    def __hash__(self):
        return hash((self.twice_u, self.twice_v))

    def __lt__(self, other):
        return (self.diagonal, self.twice_u) < (other.diagonal, other.twice_u)

    def __repr__(self):
        return f"LatticeVertex({self.u}, {self.v})"


# --------------------------------------------------------------------------
# Weight fields
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Domain:
    """Inclusive rectangle of Z^2 vertices."""

    u_min: int
    u_max: int
    v_min: int
    v_max: int

    def __contains__(self, uv):
        u, v = uv
        return self.u_min <= u <= self.u_max and self.v_min <= v <= self.v_max


class WeightField:
    """Assignment of an edge probability p_{u,v} to each Z^2 vertex.

    Build one with :meth:`constant`, :meth:`alternating`, :meth:`polya`,
    :meth:`table` or :meth:`from_csv`.  Weights given as ints, Fractions or
    strings are exact; float parameters put the field in float mode, where
    :attr:`exact` is False and exact oracles refuse it.
    """

    KINDS = ("constant", "alternating", "polya", "table")

    def __init__(self, kind: str, params: dict, domain: Domain | None = None):
        if kind not in self.KINDS:
            raise ValueError(f"unknown weight field kind {kind!r}")
        self.kind = kind
        self.params = dict(params)
        self.domain = domain
        if kind == "table":
            self.exact = all(isinstance(p, Fraction) for p in params["table"].values())
        elif kind == "polya":
            self.exact = True
        else:
            self.exact = all(isinstance(p, Fraction) for p in params.values())
        if kind == "constant":
            _check_range(params["p"])
        if kind == "table":
            for p in params["table"].values():
                _check_range(p)

    @classmethod
    def constant(cls, p, domain: Domain | None = None) -> "WeightField":
        return cls("constant", {"p": _as_probability(p)}, domain)

    @classmethod
    def alternating(cls, lambda_plus, lambda_minus, eps, domain=None) -> "WeightField":
        return cls(
            "alternating",
            {
                "lambda_plus": _as_probability(lambda_plus),
                "lambda_minus": _as_probability(lambda_minus),
                "eps": _as_probability(eps),
            },
            domain,
        )

    @classmethod
    def polya(cls, domain: Domain | None = None) -> "WeightField":
        return cls("polya", {}, domain)

    @classmethod
    def table(cls, mapping: Mapping[tuple[int, int], object]) -> "WeightField":
        table = {(int(u), int(v)): _as_probability(p) for (u, v), p in mapping.items()}
        if not table:
            raise ValueError("empty weight table")
        us = [u for u, _ in table]
        vs = [v for _, v in table]
        return cls("table", {"table": table}, Domain(min(us), max(us), min(vs), max(vs)))

    @classmethod
    def from_csv(cls, path) -> "WeightField":
        """Load a table field from CSV rows ``u,v,p`` (a header row is optional)."""
        mapping = {}
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].strip().startswith("#"):
                    continue
                try:
                    u, v = int(row[0]), int(row[1])
                except ValueError:
                    continue  # header
                mapping[(u, v)] = Fraction(row[2].strip())
        return cls.table(mapping)

    def weight(self, u: int, v: int):
        """p_{u,v} at the Z^2 vertex (u, v); Fraction in exact mode."""
        if self.domain is not None and (u, v) not in self.domain:
            raise OutOfDomain(f"({u}, {v}) outside {self.domain}")
        kind = self.kind
        if kind == "constant":
            return self.params["p"]
        if kind == "polya":
            if u <= 0 or v <= 0:
                raise PolyaAtBoundary(f"Polya weight undefined at ({u}, {v})")
            return Fraction(u, u + v)
        if kind == "alternating":
            eps = self.params["eps"]
            if (u + v) % 2 == 0:
                p = self.params["lambda_plus"] * eps
            else:
                p = 1 - self.params["lambda_minus"] * eps
            _check_range(p)
            return p
        try:
            return self.params["table"][(u, v)]
        except KeyError:
            raise OutOfDomain(f"({u}, {v}) not in weight table") from None

    def exact_weight(self, u: int, v: int) -> Fraction:
        if not self.exact:
            raise InexactWeights(f"{self.kind} field has floating-point parameters")
        return self.weight(u, v)

    def weights_float(self, u, v) -> np.ndarray:
        """Vectorised float weights at arrays of Z^2 coordinates."""
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        if self.domain is not None:
            d = self.domain
            bad = (u < d.u_min) | (u > d.u_max) | (v < d.v_min) | (v > d.v_max)
            if bad.any():
                raise OutOfDomain(f"vertex outside {d}")
        if self.kind == "constant":
            return np.full(u.shape, float(self.params["p"]))
        if self.kind == "polya":
            if ((u <= 0) | (v <= 0)).any():
                raise PolyaAtBoundary("Polya weight undefined off the positive quadrant")
            return u / (u + v)
        if self.kind == "alternating":
            lp = float(self.params["lambda_plus"])
            lm = float(self.params["lambda_minus"])
            eps = float(self.params["eps"])
            for p in (lp * eps, 1 - lm * eps):
                _check_range(p)
            return np.where((u + v) % 2 == 0, lp * eps, 1 - lm * eps)
        out = np.empty(u.shape)
        for i, (uu, vv) in enumerate(zip(u.ravel(), v.ravel())):
            out.flat[i] = float(self.weight(int(uu), int(vv)))
        return out

    def describe(self) -> dict:
        """JSON-friendly description (inverse of :func:`field_from_description`)."""
        if self.kind == "table":
            return {"kind": "table", "rows": len(self.params["table"])}
        d = {"kind": self.kind}
        d.update({k: str(v) for k, v in self.params.items()})
        return d

    def __repr__(self):
        return f"WeightField({self.kind!r}, {self.params if self.kind != 'table' else '...'})"


def _check_range(p):
    if not (0 <= p <= 1):
        raise WeightOutOfRange(f"weight {p} outside [0, 1]")


def field_from_description(desc: Mapping) -> WeightField:
    """Build a field from a config mapping such as ``{"kind": "constant", "p": "1/2"}``."""
    kind = desc.get("kind")
    if kind == "constant":
        return WeightField.constant(desc["p"])
    if kind == "alternating":
        return WeightField.alternating(desc["lambda_plus"], desc["lambda_minus"], desc["eps"])
    if kind == "polya":
        return WeightField.polya()
    if kind == "table":
        return WeightField.from_csv(desc["path"])
    raise ValueError(f"unknown weight field kind {kind!r}")


def weight_at(field: WeightField, vertex: LatticeVertex):
    """Edge probability at a Z^2 vertex, exact when the field is exact."""
    if vertex.is_half:
        raise ParityError(f"{vertex} is not a Z^2 vertex")
    return field.weight(int(vertex.u), int(vertex.v))


def choice_weight(field: WeightField, diagonal: int, k: int):
    """Probability of West at the Z'^2 vertex with index ``k`` on ``diagonal``."""
    return field.weight(k, diagonal - 1 - k)


# --------------------------------------------------------------------------
# Coordinate systems
# --------------------------------------------------------------------------

class CoordinateSystem:
    """Time/space functions turning diagonals into particle trajectories.

    ``arratia``: t = u + v, x = u - v.  ``asymmetric``: t = u + v, x = u.
    ``bidirectional``: t = u + v, x = u - floor(t / 2).
    """

    KINDS = ("arratia", "asymmetric", "bidirectional")

    def __init__(self, kind: str):
        if kind not in self.KINDS:
            raise ValueError(f"unknown coordinate system {kind!r}")
        self.kind = kind

    def __repr__(self):
        return f"CoordinateSystem({self.kind!r})"


def to_spacetime(cs: CoordinateSystem, vertex: LatticeVertex) -> tuple[int, Fraction]:
    u, v = vertex.u, vertex.v
    t = vertex.diagonal
    if cs.kind == "arratia":
        x = u - v
    elif cs.kind == "asymmetric":
        x = u
    else:
        x = u - t // 2
    return t, x


def from_spacetime(cs: CoordinateSystem, t: int, x) -> LatticeVertex:
    t = as_integer(t)
    x = Fraction(x)
    if cs.kind == "arratia":
        u = (t + x) / 2
    elif cs.kind == "asymmetric":
        u = x
    else:
        u = x + t // 2
    return LatticeVertex(u, t - u)


# --------------------------------------------------------------------------
# Cones of dependence
# --------------------------------------------------------------------------

def cone_of_dependence(endpoints: Iterable[LatticeVertex], horizon: int) -> frozenset:
    """Z'^2 vertices reachable by backward paths from ``endpoints``.

    Covers diagonals T, T-1, ..., T-horizon.  Backward lineages started at
    the endpoints never leave this set within ``horizon`` steps.
    """
    endpoints = list(endpoints)
    if not endpoints:
        raise EmptyEndpoints("no endpoints given")
    T = endpoints[0].diagonal
    for e in endpoints:
        if not e.is_half:
            raise ParityError(f"{e} is not a Z'^2 vertex")
        if e.diagonal != T:
            raise SpecError("endpoints lie on different diagonals")
    if not 0 <= horizon <= T:
        raise SpecError(f"horizon {horizon} outside [0, {T}]")
    cone = set()
    for e in endpoints:
        k0 = e.index
        for depth in range(horizon + 1):
            for k in range(k0 - depth, k0 + 1):
                cone.add(LatticeVertex.zprime(T - depth, k))
    return frozenset(cone)
