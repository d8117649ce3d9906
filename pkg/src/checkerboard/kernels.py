"""Crossing-or-meeting probabilities of two independent backward particles.

These are the entries of the Pfaffian matrix.  Discrete kernels return exact
Fractions when their parameters are rational and floats otherwise;
continuous-time kernels always return floats.

Coordinates: the biased walk uses Arratia's x = u - v (steps of +-1, so two
Z'^2 vertices a < b on one diagonal sit at separation 2(b - a)); the totally
asymmetric walk uses x = u (steps of -1 or 0).  Both describe the constant
field, from two different coordinate charts.
"""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

import numpy as np
from scipy import special, stats

from .errors import NonPositiveParameters, ParityError, SpecError
from .lattice import WeightField, choice_weight, zprime_index

SKELLAM_RTOL = 1e-18


def _is_exact(p) -> bool:
    return isinstance(p, (int, Fraction)) and not isinstance(p, bool)


def _integral_half(value) -> int | None:
    f = Fraction(value)
    return int(f) if f.denominator == 1 else None


# --------------------------------------------------------------------------
# Biased random walk (Arratia coordinates)
# --------------------------------------------------------------------------

def w_biased(T: int, x, y, p):
    """Backward transition weight: binom(T, r) q^r p^(T - r), r = (T + y - x)/2.

    r counts rightward backward jumps, which happen with probability q = 1 - p.
    """
    r = _integral_half(Fraction(T + Fraction(y) - Fraction(x), 2))
    if r is None or not 0 <= r <= T:
        return Fraction(0) if _is_exact(p) else 0.0
    if _is_exact(p):
        p = Fraction(p)
        return math.comb(T, r) * (1 - p) ** r * p ** (T - r)
    return float(stats.binom.pmf(r, T, 1.0 - p))


def _binomial_row(T: int, p):
    """Weights binom(T, r) q^r p^(T-r) for r = 0..T.

    Exact p gives (integer numerators, common denominator d^T); float p gives
    a float array.
    """
    if _is_exact(p):
        p = Fraction(p)
        n, d = p.numerator, p.denominator
        m = d - n
        nums = []
        c = 1
        for r in range(T + 1):
            nums.append(c * m**r * n ** (T - r))
            c = c * (T - r) // (r + 1)
        return nums, d**T
    return stats.binom.pmf(np.arange(T + 1), T, 1.0 - p), 1


def _pair_sums(w_i, w_j):
    """(terminal, noncrossing) sums over a common increasing support.

    terminal    = 2 sum_{y1<y2} w_i(y2) w_j(y1) + sum_y w_i(y) w_j(y)
    noncrossing = sum_{y1<y2} [w_i(y1) w_j(y2) - w_i(y2) w_j(y1)]
    """
    if isinstance(w_i, np.ndarray):
        w_i = np.asarray(w_i, dtype=float)
        w_j = np.asarray(w_j, dtype=float)
        before_j = np.concatenate(([0.0], np.cumsum(w_j)[:-1]))
        before_i = np.concatenate(([0.0], np.cumsum(w_i)[:-1]))
        terminal = float(np.sum(w_i * (2.0 * before_j + w_j)))
        noncross = float(np.sum(before_i * w_j) - np.sum(w_i * before_j))
        return terminal, noncross
    terminal = 0
    noncross = 0
    cum_i = 0
    cum_j = 0
    for a, b in zip(w_i, w_j):
        terminal += a * (2 * cum_j + b)
        noncross += cum_i * b - a * cum_j
        cum_i += a
        cum_j += b
    return terminal, noncross


def _biased_aligned(T: int, delta: int, p):
    """Weights of particles at Arratia 0 and delta on the grid y = -T + 2i."""
    row, denom = _binomial_row(T, p)
    half = delta // 2
    size = T + half + 1
    if isinstance(row, np.ndarray):
        w_i = np.zeros(size)
        w_j = np.zeros(size)
        w_i[: T + 1] = row
        w_j[half:] = row
    else:
        w_i = row + [0] * half
        w_j = [0] * half + row
    return w_i, w_j, denom


def _biased_separation(T: int, x_i, x_j) -> int:
    if T < 0:
        raise SpecError("negative horizon")
    delta = Fraction(x_j) - Fraction(x_i)
    if delta < 0:
        raise SpecError("need x_I <= x_J")
    if delta.denominator != 1 or int(delta) % 2:
        raise ParityError(f"separation {delta} is not an even integer")
    return int(delta)


@lru_cache(maxsize=4096)
def _terminal_cached(T: int, delta: int, p):
    if delta == 0:
        return Fraction(1) if _is_exact(p) else 1.0
    w_i, w_j, denom = _biased_aligned(T, delta, p)
    terminal, _ = _pair_sums(w_i, w_j)
    if _is_exact(p):
        return Fraction(terminal, denom * denom)
    return terminal


def a_crossing_terminal(T: int, x_i, x_j, p):
    """Crossing-or-meeting probability from the terminal positions.

    Paths that end crossed count twice (once for themselves, once for their
    reflection after the first meeting); paths that end together count once.
    """
    return _terminal_cached(T, _biased_separation(T, x_i, x_j), p)


def a_crossing_km(T: int, x_i, x_j, p):
    """One minus the Karlin-McGregor non-crossing probability."""
    delta = _biased_separation(T, x_i, x_j)
    if delta == 0:
        return Fraction(1) if _is_exact(p) else 1.0
    w_i, w_j, denom = _biased_aligned(T, delta, p)
    _, noncross = _pair_sums(w_i, w_j)
    if _is_exact(p):
        return 1 - Fraction(noncross, denom * denom)
    return 1.0 - noncross


# --------------------------------------------------------------------------
# Totally asymmetric walk (x = u)
# --------------------------------------------------------------------------

def w_asymmetric(T: int, x, y, p):
    """binom(T, x - y) p^(x-y) q^(T-x+y): the backward particle jumps -1 or stays."""
    k = Fraction(x) - Fraction(y)
    if k.denominator != 1 or not 0 <= k <= T:
        return Fraction(0) if _is_exact(p) else 0.0
    k = int(k)
    if _is_exact(p):
        p = Fraction(p)
        return math.comb(T, k) * p**k * (1 - p) ** (T - k)
    return float(stats.binom.pmf(k, T, p))


@lru_cache(maxsize=4096)
def _asymmetric_cached(T: int, delta: int, p):
    if delta == 0:
        return Fraction(1) if _is_exact(p) else 1.0
    # grid y = -T + i; particle I at 0 jumps k = -y, J at delta jumps k = delta - y
    size = T + delta + 1
    if _is_exact(p):
        p = Fraction(p)
        n, d = p.numerator, p.denominator
        row = [math.comb(T, k) * n**k * (d - n) ** (T - k) for k in range(T + 1)]
        w_i = row[::-1] + [0] * delta
        w_j = [0] * delta + row[::-1]
        _, noncross = _pair_sums(w_i, w_j)
        return 1 - Fraction(noncross, d ** (2 * T))
    row = stats.binom.pmf(np.arange(T + 1), T, p)[::-1]
    w_i = np.zeros(size)
    w_j = np.zeros(size)
    w_i[: T + 1] = row
    w_j[delta:] = row
    _, noncross = _pair_sums(w_i, w_j)
    return 1.0 - noncross


def a_crossing_asymmetric(T: int, x_i, x_j, p):
    """Karlin-McGregor complement for two totally asymmetric backward particles."""
    delta = Fraction(x_j) - Fraction(x_i)
    if delta.denominator != 1 or delta < 0:
        raise SpecError(f"bad separation {delta}")
    return _asymmetric_cached(T, int(delta), p)


# --------------------------------------------------------------------------
# Poisson jumps and bidirectional rates
# --------------------------------------------------------------------------

def _check_positive(**kw):
    for name, v in kw.items():
        if not v > 0:
            raise NonPositiveParameters(f"{name} must be positive, got {v}")


def a_crossing_poisson(t: float, lam: float, delta: int) -> float:
    """1 - e^{-2 lam t}[I_0 + 2 sum_{k<delta} I_k + I_delta](2 lam t)."""
    _check_positive(t=t, lam=lam, delta=delta)
    z = 2.0 * lam * t
    ks = np.arange(1, delta)
    inner = special.ive(0, z) + 2.0 * special.ive(ks, z).sum() + special.ive(delta, z)
    return float(1.0 - inner)


def skellam_pmf(k, t: float, lam: float, delta: int):
    """P(D(t) = k) for the separation walk started at ``delta`` (jumps +-1 at rate lam)."""
    return special.ive(np.abs(np.asarray(k) - delta), 2.0 * lam * t)


def skellam_crossing(t: float, lam: float, delta: int) -> float:
    """2 P(D(t) < 0) + P(D(t) = 0), summing the Skellam tail directly."""
    _check_positive(t=t, lam=lam, delta=delta)
    z = 2.0 * lam * t
    below = 0.0
    j = delta + 1
    while True:
        term = float(special.ive(j, z))
        below += term
        if term == 0.0 or term < SKELLAM_RTOL * below:
            break
        j += 1
    _check_normalisation(z, j)
    return 2.0 * below + float(special.ive(delta, z))


def _check_normalisation(z: float, upto: int):
    k = max(upto, int(z + 40.0 * math.sqrt(z + 1.0)) + 40)
    total = special.ive(0, z) + 2.0 * special.ive(np.arange(1, k + 1), z).sum()
    if abs(total - 1.0) > 1e-10:
        raise FloatingPointError(f"Skellam pmf sums to {total!r}")


def w_bidirectional(t: float, lambda_plus: float, lambda_minus: float, x, y):
    """Backward weight with +1 at rate lambda_minus and -1 at rate lambda_plus."""
    _check_positive(t=t, lambda_plus=lambda_plus, lambda_minus=lambda_minus)
    d = np.asarray(y, dtype=float) - np.asarray(x, dtype=float)
    z = 2.0 * math.sqrt(lambda_plus * lambda_minus) * t
    lam = lambda_plus + lambda_minus
    log_pref = z - lam * t + 0.5 * d * math.log(lambda_minus / lambda_plus)
    with np.errstate(over="ignore", invalid="ignore"):
        w = np.exp(log_pref) * special.ive(np.abs(d), z)
    w = np.where(np.isfinite(w), w, 0.0)
    return float(w) if w.ndim == 0 else w


def _jump_reach(lam_t: float) -> int:
    return int(math.ceil(lam_t + 12.0 * math.sqrt(lam_t) + 40.0))


def a_crossing_bidirectional(t: float, lambda_plus: float, lambda_minus: float, delta: int) -> float:
    """Crossing-or-meeting probability from the two particles' transition weights."""
    _check_positive(delta=delta)
    reach = _jump_reach((lambda_plus + lambda_minus) * t)
    y = np.arange(-reach, delta + reach + 1)
    w_i = w_bidirectional(t, lambda_plus, lambda_minus, 0, y)
    w_j = w_bidirectional(t, lambda_plus, lambda_minus, delta, y)
    terminal, _ = _pair_sums(w_i, w_j)
    return terminal


# --------------------------------------------------------------------------
# Brownian limit and the continuum kernel
# --------------------------------------------------------------------------

def a_crossing_erfc(t: float, x_i: float, x_j: float) -> float:
    return math.erfc((x_j - x_i) / (2.0 * math.sqrt(t)))


def tz_scalar(z: float) -> float:
    """F(z) = erfc(z / 2)."""
    return math.erfc(z / 2.0)


def tz_first_derivative(z: float) -> float:
    return -math.exp(-z * z / 4.0) / math.sqrt(math.pi)


def tz_second_derivative(z: float) -> float:
    return 0.5 * z * math.exp(-z * z / 4.0) / math.sqrt(math.pi)


def tz_kernel(x: float, y: float) -> np.ndarray:
    """2x2 continuum kernel [[-F''(d), -F'(d)], [F'(d), sgn(d) F(|d|)]], d = y - x."""
    d = y - x
    return np.array(
        [
            [-tz_second_derivative(d), -tz_first_derivative(d)],
            [tz_first_derivative(d), float(np.sign(d)) * tz_scalar(abs(d))],
        ]
    )


# --------------------------------------------------------------------------
# Inhomogeneous environments
# --------------------------------------------------------------------------

def a_crossing_inhomogeneous(field: WeightField, T: int, a, b, entrance: int = 0):
    """Probability that independent backward particles from a < b weakly invert order.

    ``a`` and ``b`` are Z'^2 u-coordinates on diagonal ``T``; each particle
    steps West with the field probability at its own vertex.  Exact DP over
    joint positions with an absorbing met-or-crossed state.
    """
    ka, kb = zprime_index(a), zprime_index(b)
    exact = field.exact
    one = Fraction(1) if exact else 1.0
    if ka > kb:
        raise SpecError("need a <= b")
    if ka == kb:
        return one
    hit = Fraction(0) if exact else 0.0
    state = {(ka, kb): one}
    for n in range(T, entrance, -1):
        nxt = defaultdict(lambda: Fraction(0) if exact else 0.0)
        for (ki, kj), mass in state.items():
            pi = choice_weight(field, n, ki)
            pj = choice_weight(field, n, kj)
            for di, wi in ((1, pi), (0, 1 - pi)):
                if not wi:
                    continue
                for dj, wj in ((1, pj), (0, 1 - pj)):
                    if not wj:
                        continue
                    ni, nj = ki - di, kj - dj
                    if ni >= nj:
                        hit += mass * wi * wj
                    else:
                        nxt[(ni, nj)] += mass * wi * wj
        state = nxt
    return hit


# --------------------------------------------------------------------------
# Kernel specifications
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class KernelSpec:
    """Which dynamics fill the Pfaffian matrix.

    ``crossing(a, b)`` takes endpoint positions a <= b: Z'^2 u-coordinates on
    the observation diagonal for the lattice kinds (biased, asymmetric,
    inhomogeneous), positions on Z for poisson / bidirectional, and reals
    for erfc.
    """

    kind: str
    p: object = None
    T: int | None = None
    lam: float | None = None
    lambda_plus: float | None = None
    lambda_minus: float | None = None
    t: float | None = None
    field: WeightField | None = None
    diagonal: int | None = None

    KINDS = ("biased", "asymmetric", "poisson", "bidirectional", "erfc", "inhomogeneous")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind in ("biased", "asymmetric"):
            p = self.p
            if isinstance(p, str):
                p = Fraction(p)
                object.__setattr__(self, "p", p)
            if not 0 < p < 1:
                raise ValueError("p must lie in (0, 1)")
            if self.T is None or self.T < 0:
                raise ValueError("discrete kernels need a horizon T >= 0")
        elif self.kind == "poisson":
            _check_positive(lam=self.lam, t=self.t)
        elif self.kind == "bidirectional":
            _check_positive(lambda_plus=self.lambda_plus, lambda_minus=self.lambda_minus, t=self.t)
        elif self.kind == "erfc":
            _check_positive(t=self.t)
        else:
            if self.field is None or self.T is None or self.diagonal is None:
                raise ValueError("inhomogeneous kernels need field, T and diagonal")

    @classmethod
    def biased(cls, p, T):
        return cls("biased", p=p, T=T)

    @classmethod
    def asymmetric(cls, p, T):
        return cls("asymmetric", p=p, T=T)

    @classmethod
    def poisson(cls, lam, t):
        return cls("poisson", lam=lam, t=t)

    @classmethod
    def bidirectional(cls, lambda_plus, lambda_minus, t):
        return cls("bidirectional", lambda_plus=lambda_plus, lambda_minus=lambda_minus, t=t)

    @classmethod
    def erfc(cls, t):
        return cls("erfc", t=t)

    @classmethod
    def inhomogeneous(cls, field, diagonal, T):
        return cls("inhomogeneous", field=field, diagonal=diagonal, T=T)

    @property
    def exact(self) -> bool:
        if self.kind in ("biased", "asymmetric"):
            return _is_exact(self.p)
        if self.kind == "inhomogeneous":
            return self.field.exact
        return False

    @property
    def horizon(self) -> int | None:
        return self.T

    def crossing(self, a, b):
        if a == b:
            return Fraction(1) if self.exact else 1.0
        if b < a:
            raise SpecError("crossing(a, b) needs a <= b")
        kind = self.kind
        if kind == "biased":
            return a_crossing_terminal(self.T, 0, 2 * (Fraction(b) - Fraction(a)), self.p)
        if kind == "asymmetric":
            return a_crossing_asymmetric(self.T, a, b, self.p)
        if kind == "inhomogeneous":
            return a_crossing_inhomogeneous(self.field, self.diagonal, a, b, self.diagonal - self.T)
        if kind == "erfc":
            return a_crossing_erfc(self.t, float(a), float(b))
        delta = Fraction(b) - Fraction(a)
        if delta.denominator != 1:
            raise SpecError("continuous-time kernels need integer separations")
        if kind == "poisson":
            return a_crossing_poisson(self.t, self.lam, int(delta))
        return a_crossing_bidirectional(self.t, self.lambda_plus, self.lambda_minus, int(delta))

    def describe(self) -> dict:
        d = {"kind": self.kind}
        for name in ("p", "T", "lam", "lambda_plus", "lambda_minus", "t", "diagonal"):
            v = getattr(self, name)
            if v is not None:
                d[name] = str(v) if isinstance(v, Fraction) else v
        if self.field is not None:
            d["field"] = self.field.describe()
        return d


def kernel_from_description(desc: dict, field: WeightField | None = None) -> KernelSpec:
    kind = desc.get("kind")
    conv = {
        "p": lambda v: Fraction(v) if isinstance(v, (str, int)) else float(v),
        "T": int,
        "diagonal": int,
        "lam": float,
        "lambda_plus": float,
        "lambda_minus": float,
        "t": float,
    }
    kwargs = {k: conv[k](v) for k, v in desc.items() if k in conv}
    if kind == "inhomogeneous":
        kwargs["field"] = field
    return KernelSpec(kind, **kwargs)


def kernel_table(kind: str, Ts: Iterable[int], deltas: Iterable[int], **params) -> list[tuple]:
    """Rows (delta, T, A) in the kernel's own spatial coordinate.

    For the biased kind delta is the Arratia separation; odd values have no
    common support and are skipped.
    """
    rows = []
    for T in Ts:
        for delta in deltas:
            if kind == "biased":
                if delta % 2:
                    continue
                a = a_crossing_terminal(T, 0, delta, params["p"])
            elif kind == "asymmetric":
                a = a_crossing_asymmetric(T, 0, delta, params["p"])
            elif kind == "poisson":
                a = a_crossing_poisson(T, params["lam"], delta)
            elif kind == "bidirectional":
                a = a_crossing_bidirectional(T, params["lambda_plus"], params["lambda_minus"], delta)
            elif kind == "erfc":
                a = a_crossing_erfc(T, 0.0, float(delta))
            else:
                raise ValueError(f"kernel table not available for {kind!r}")
            rows.append((delta, T, a))
    return rows


def format_number(x) -> str:
    """Exact values as p/q, floats with 17 significant digits."""
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def kernel_table_csv(rows) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["delta", "T", "A", "A_float"])
    for delta, T, a in rows:
        wr.writerow([delta, format_number(T), format_number(a), f"{float(a):.17g}"])
    return buf.getvalue()
