"""Pfaffians of antisymmetric matrices and the empty-interval matrix.

Exact evaluation expands over perfect matchings (fine up to order 12);
floating evaluation uses a pivoted skew-symmetric (Parlett-Reid)
tridiagonalisation.
"""

from __future__ import annotations

import csv
import io
from fractions import Fraction
from math import lcm
from typing import Iterator, Sequence

import numpy as np

from .errors import OddOrder, OrderCap, SpecError
from .forests import IntervalSpec
from .kernels import KernelSpec, format_number

EXACT_ORDER_CAP = 12


class AntisymmetricMatrix:
    """Even-order skew matrix held as a full array (object dtype when exact)."""

    def __init__(self, entries):
        a = np.array(entries, dtype=object if _has_fraction(entries) else float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("matrix must be square")
        n = a.shape[0]
        for i in range(n):
            if a[i, i] != 0:
                raise ValueError("diagonal must vanish")
            for j in range(i + 1, n):
                if a[j, i] != -a[i, j]:
                    raise ValueError(f"entries ({i},{j}) and ({j},{i}) are not opposite")
        self.entries = a

    @classmethod
    def from_upper(cls, order: int, upper) -> "AntisymmetricMatrix":
        """Build from a callable or mapping giving A[k, l] for k < l."""
        get = upper if callable(upper) else (lambda k, l: upper[k, l])
        vals = {(k, l): get(k, l) for k in range(order) for l in range(k + 1, order)}
        exact = any(isinstance(v, Fraction) for v in vals.values())
        zero = Fraction(0) if exact else 0.0
        a = np.empty((order, order), dtype=object if exact else float)
        a[...] = zero
        for (k, l), v in vals.items():
            a[k, l] = v
            a[l, k] = -v
        m = cls.__new__(cls)
        m.entries = a
        return m

    @property
    def order(self) -> int:
        return self.entries.shape[0]

    @property
    def exact(self) -> bool:
        return self.entries.dtype == object

    def __getitem__(self, idx):
        return self.entries[idx]

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        for row in self.entries:
            wr.writerow([format_number(x) for x in row])
        return buf.getvalue()


def _has_fraction(entries) -> bool:
    return any(isinstance(x, Fraction) for row in entries for x in row)


def _entries(A):
    return A.entries if isinstance(A, AntisymmetricMatrix) else A


def perfect_matchings(indices: Sequence[int]) -> Iterator[tuple[int, list[tuple[int, int]]]]:
    """Yield (sign, pairs) for every perfect matching, expanding along the first index."""
    if not indices:
        yield 1, []
        return
    first, rest = indices[0], indices[1:]
    for pos, partner in enumerate(rest):
        sign = -1 if pos % 2 else 1
        remaining = rest[:pos] + rest[pos + 1:]
        for s, pairs in perfect_matchings(remaining):
            yield sign * s, [(first, partner)] + pairs


def pfaffian_exact(A):
    """Signed sum over perfect matchings; exact for Fraction or int entries."""
    a = _entries(A)
    n = len(a)
    if n % 2:
        raise OddOrder(f"order {n} is odd")
    if n > EXACT_ORDER_CAP:
        raise OrderCap(f"exact expansion capped at order {EXACT_ORDER_CAP}")
    total = Fraction(0)
    for sign, pairs in perfect_matchings(tuple(range(n))):
        term = Fraction(sign)
        for i, j in pairs:
            term *= a[i][j]
            if not term:
                break
        total += term
    return total


def pfaffian_float(A) -> float:
    """Pfaffian by pivoted skew tridiagonalisation, O(n^3)."""
    a = np.array(_entries(A), dtype=float)
    n = a.shape[0]
    if n % 2:
        raise OddOrder(f"order {n} is odd")
    pf = 1.0
    for k in range(0, n - 1, 2):
        kp = k + 1 + int(np.argmax(np.abs(a[k + 1:, k])))
        if kp != k + 1:
            a[[k + 1, kp], :] = a[[kp, k + 1], :]
            a[:, [k + 1, kp]] = a[:, [kp, k + 1]]
            pf = -pf
        pivot = a[k, k + 1]
        if pivot == 0.0:
            return 0.0
        pf *= pivot
        if k + 2 < n:
            tau = a[k, k + 2:] / pivot
            col = a[k + 2:, k + 1].copy()
            a[k + 2:, k + 2:] += np.outer(tau, col) - np.outer(col, tau)
    return float(pf)


def pfaffian(A):
    """Exact when entries are rational and the order allows, floating otherwise."""
    a = _entries(A)
    exact = a.dtype == object if isinstance(a, np.ndarray) else _has_fraction(a)
    if exact and len(a) <= EXACT_ORDER_CAP:
        return pfaffian_exact(a)
    return pfaffian_float(a)


def det_exact(A) -> Fraction:
    """Determinant of a rational matrix by fraction-free (Bareiss) elimination."""
    rows = [[Fraction(x) for x in row] for row in _entries(A)]
    n = len(rows)
    if n == 0:
        return Fraction(1)
    scale = 1
    for row in rows:
        scale = lcm(scale, *(x.denominator for x in row))
    m = [[int(x * scale) for x in row] for row in rows]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if swap is None:
                return Fraction(0)
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return Fraction(sign * m[n - 1][n - 1], scale**n)


def assemble_empty_interval_matrix(kernel: KernelSpec, spec: IntervalSpec) -> AntisymmetricMatrix:
    """2n x 2n matrix of crossing probabilities between the endpoints of ``spec``.

    Coincident endpoints (touching intervals) get entry 1.
    """
    if kernel.horizon is not None and kernel.kind != "inhomogeneous" and kernel.horizon != spec.horizon:
        raise SpecError(f"kernel horizon {kernel.horizon} differs from spec horizon {spec.horizon}")
    if kernel.kind == "inhomogeneous" and (kernel.diagonal != spec.diagonal or kernel.T != spec.horizon):
        raise SpecError("inhomogeneous kernel is set up for another diagonal")
    pts = spec.endpoints
    return AntisymmetricMatrix.from_upper(len(pts), lambda k, l: kernel.crossing(pts[k], pts[l]))


def empty_interval_probability(kernel: KernelSpec, spec: IntervalSpec):
    """Pf of :func:`assemble_empty_interval_matrix`."""
    return pfaffian(assemble_empty_interval_matrix(kernel, spec))
