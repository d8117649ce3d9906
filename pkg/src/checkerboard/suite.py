"""Cross-validation checks run by ``checkerboard verify``.

Each check compares two independent routes to the same quantity and
reports the worst discrepancy against a tolerance.  The ``quick`` profile
shrinks horizons and sample counts; ``full`` uses the production sizes.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np
from scipy import stats

from . import kernels as K
from .exact import enumerate_event_probabilities, lineage_event_probability
from .forests import EVENTS, IntervalSpec
from .lattice import WeightField
from .montecarlo import Z_FLAG, estimate_correlation, estimate_event, event_indicators
from .pfaffian import AntisymmetricMatrix, det_exact, empty_interval_probability, pfaffian_exact, pfaffian_float
from .pointprocess import SiteSet, alternating_subset_sums, correlation_mobius, correlation_pfaffian, gap_probability

PROFILES = ("quick", "full")
H = Fraction(1, 2)

_SIZES = {
    "quick": dict(enum_T=2, lineage_T=3, km_T=8, dual_samples=20_000, mc_samples=100_000, erfc_T=3600,
                  corr_T=(1, 4), polya_h=2, asym_eps=(1e-2, 1e-3, 1e-4)),
    "full": dict(enum_T=3, lineage_T=4, km_T=12, dual_samples=100_000, mc_samples=1_000_000, erfc_T=10_000,
                 corr_T=(1, 4, 8), polya_h=3, asym_eps=(1e-2, 1e-3, 1e-4)),
}


@dataclass
class Check:
    name: str
    error: float
    tolerance: float
    detail: str = ""

    def __post_init__(self):
        self.error = float(self.error)

    @property
    def passed(self) -> bool:
        return self.error <= self.tolerance


def lattice_specs(T: int, entrance: int = 0, origin=H) -> list[IntervalSpec]:
    """Unit, length-2, touching-pair and separated-pair intervals on one diagonal."""
    o = Fraction(origin)
    return [
        IntervalSpec(T, (o, o + 1), entrance),
        IntervalSpec(T, (o, o + 2), entrance),
        IntervalSpec(T, (o, o + 1, o + 1, o + 2), entrance),
        IntervalSpec(T, (o, o + 1, o + 2, o + 3), entrance),
    ]


def check_exact_triple(sz) -> Check:
    worst = 0
    for p in (H, Fraction(1, 3)):
        field = WeightField.constant(p)
        for T in range(1, sz["enum_T"] + 1):
            specs = lattice_specs(T)
            vals = enumerate_event_probabilities(field, specs)
            for i in range(len(specs)):
                ref = vals[(i, EVENTS[0])]
                worst = max(worst, *(abs(vals[(i, ev)] - ref) for ev in EVENTS))
    return Check("exact duality triple", float(worst), 0.0)


def check_pfaffian_lineage(sz) -> Check:
    worst = 0
    for p in (H, Fraction(1, 3)):
        field = WeightField.constant(p)
        for T in range(1, sz["lineage_T"] + 1):
            kern = K.KernelSpec.biased(p, T)
            for spec in lattice_specs(T):
                worst = max(worst, abs(empty_interval_probability(kern, spec) - lineage_event_probability(field, spec)))
    return Check("pfaffian vs lineage oracle", float(worst), 0.0)


def check_terminal_km(sz) -> Check:
    worst = 0
    for p in (H, Fraction(1, 3), Fraction(9, 10)):
        for T in range(1, sz["km_T"] + 1):
            for d in range(0, 2 * T + 1, 2):
                worst = max(worst, abs(K.a_crossing_terminal(T, 0, d, p) - K.a_crossing_km(T, 0, d, p)))
    return Check("terminal vs karlin-mcgregor", float(worst), 0.0)


def check_sample_duality(sz, seed) -> Check:
    field = WeightField.constant(0.4)
    spec = IntervalSpec(8, (H, 5 * H, 7 * H, 11 * H))
    ind = event_indicators(field, spec, np.arange(sz["dual_samples"]), seed)
    bad = int(np.sum((ind[EVENTS[0]] != ind[EVENTS[1]]) | (ind[EVENTS[0]] != ind[EVENTS[2]])))
    return Check("per-sample dualities", float(bad), 0.0, f"{sz['dual_samples']} samples")


def check_mc_pfaffian(sz, seed, threads) -> Check:
    field = WeightField.constant(H)
    kern = K.KernelSpec.biased(H, 16)
    worst = 0.0
    for length in (1, 3):
        spec = IntervalSpec(16, (H, H + length))
        pf = empty_interval_probability(kern, spec)
        mc = estimate_event(field, spec, "empty_interval", sz["mc_samples"], seed, threads)
        worst = max(worst, abs(mc.mean - float(pf)) / mc.stderr)
    return Check("monte carlo vs pfaffian (|z|)", worst, Z_FLAG, f"N={sz['mc_samples']}")


def check_erfc(sz) -> Check:
    T = sz["erfc_T"]
    worst = 0.0
    for d in (T // 100, T // 50):
        ref = math.erfc(d / (2 * math.sqrt(T)))
        worst = max(worst, abs(float(K.a_crossing_terminal(T, 0, d, H)) - ref) / ref)
    return Check("erfc limit (relative)", worst, 0.02, f"T={T}")


def check_skellam(sz) -> Check:
    worst = 0.0
    for lt in (0.1, 1.0, 5.0, 20.0):
        for d in (1, 2, 5, 10):
            a = K.a_crossing_poisson(lt, 1.0, d)
            worst = max(worst, abs(a - K.skellam_crossing(lt, 1.0, d)))
            worst = max(worst, abs(a - K.a_crossing_bidirectional(lt, 0.5, 0.5, d)))
    return Check("bessel vs skellam vs bidirectional", worst, 1e-12)


def check_rate_split(sz) -> Check:
    worst = 0.0
    for t in (0.25, 1.0, 3.0):
        for d in (1, 2, 5):
            vals = [K.a_crossing_bidirectional(t, lp, 4.0 - lp, d) for lp in (1.0, 2.0, 3.0)]
            worst = max(worst, max(vals) - min(vals))
    return Check("rate-split invariance", worst, 1e-12)


def check_point_process(sz, seed, threads) -> list[Check]:
    worst = 0
    worst_round = 0
    for p in (H, Fraction(1, 3)):
        for T in sz["corr_T"]:
            kern = K.KernelSpec.biased(p, T)
            for n in (1, 2, 3):
                for sites in combinations(range(5), n):
                    S = SiteSet(T, sites)
                    worst = max(worst, abs(correlation_mobius(kern, S) - correlation_pfaffian(kern, S)))
            ground = (0, 1, 3)
            G = lambda sub: gap_probability(kern, SiteSet(T, sub) if sub else None)
            rho = alternating_subset_sums(G, ground)
            back = alternating_subset_sums(lambda sub: rho[sub], ground)
            worst_round = max(worst_round, *(abs(back[s] - G(s)) for s in back))
    field = WeightField.constant(H)
    kern = K.KernelSpec.biased(H, 8)
    z = 0.0
    for sites in ((2,), (2, 3), (1, 2, 4)):
        S = SiteSet(8, sites)
        ref = float(correlation_pfaffian(kern, S))
        mc = estimate_correlation(field, S, sz["mc_samples"], seed, threads)
        z = max(z, abs(mc.mean - ref) / mc.stderr)
    return [
        Check("mobius vs pfaffian correlations", float(worst), 1e-10),
        Check("mobius round trip", float(worst_round), 1e-12),
        Check("correlations vs monte carlo (|z|)", z, Z_FLAG, f"N={sz['mc_samples']}"),
    ]


def polya_specs(h: int, entrance: int = 10) -> list[IntervalSpec]:
    T = entrance + h
    o = Fraction(11, 2)
    return [
        IntervalSpec(T, (o, o + 1), entrance),
        IntervalSpec(T, (o, o + 2), entrance),
        IntervalSpec(T, (o, o + 1, o + 1, o + 2), entrance),
    ]


def check_polya(sz) -> Check:
    field = WeightField.polya()
    worst = 0
    for h in range(1, sz["polya_h"] + 1):
        for spec in polya_specs(h):
            kern = K.KernelSpec.inhomogeneous(field, spec.diagonal, h)
            ref = enumerate_event_probabilities(field, [spec], ["empty_interval"])[(0, "empty_interval")]
            worst = max(worst, abs(empty_interval_probability(kern, spec) - ref))
    return Check("inhomogeneous (polya) pfaffian", float(worst), 0.0)


def _random_skew(order, rng, exact=True):
    entries = [[Fraction(0)] * order for _ in range(order)]
    for i in range(order):
        for j in range(i + 1, order):
            v = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
            entries[i][j], entries[j][i] = v, -v
    if exact:
        return AntisymmetricMatrix(entries)
    return AntisymmetricMatrix([[float(x) for x in row] for row in entries])


def check_pfaffian_algebra(sz, seed) -> Check:
    rng = random.Random(seed)
    worst = 0.0
    for order in (2, 4, 6, 8):
        A = _random_skew(order, rng)
        if pfaffian_exact(A) ** 2 != det_exact(A.entries):
            worst = math.inf
        a = A.entries
        if order == 4:
            expansion = a[0, 1] * a[2, 3] - a[0, 2] * a[1, 3] + a[0, 3] * a[1, 2]
            if expansion != pfaffian_exact(A):
                worst = math.inf
    for order in (2, 4, 6, 8, 10, 12):
        A = _random_skew(order, rng, exact=False)
        pf = pfaffian_float(A)
        det = np.linalg.det(A.entries)
        worst = max(worst, abs(pf * pf - det) / max(abs(det), 1e-300))
    return Check("pf^2 = det", worst, 1e-10)


def check_asymmetric(sz) -> list[Check]:
    worst_sum = 0
    for p in (H, Fraction(1, 3)):
        for T in range(13):
            worst_sum = max(worst_sum, abs(sum(K.w_asymmetric(T, 0, -k, p) for k in range(T + 1)) - 1))
    lam, t = 1.0, 1.0
    errs = []
    for eps in sz["asym_eps"]:
        T = round(t / eps)
        errs.append(max(
            abs(K.w_asymmetric(T, 0, -k, lam * eps) - stats.poisson.pmf(k, lam * t)) / stats.poisson.pmf(k, lam * t)
            for k in range(6)
        ))
    monotone = all(b < a for a, b in zip(errs, errs[1:]))
    return [
        Check("asymmetric kernel normalisation", float(worst_sum), 0.0),
        Check("asymmetric poisson limit (relative)", errs[-1] if monotone else math.inf, 1e-3,
              " ".join(f"{e:.3g}" for e in errs)),
    ]


def run_suite(profile: str = "quick", seed: int = 0, threads: int | None = None) -> list[Check]:
    if profile not in PROFILES:
        raise ValueError(f"unknown profile {profile!r}")
    sz = _SIZES[profile]
    checks = [
        check_exact_triple(sz),
        check_pfaffian_lineage(sz),
        check_terminal_km(sz),
        check_sample_duality(sz, seed),
        check_mc_pfaffian(sz, seed, threads),
        check_erfc(sz),
        check_skellam(sz),
        check_rate_split(sz),
    ]
    checks += check_point_process(sz, seed, threads)
    checks.append(check_polya(sz))
    checks.append(check_pfaffian_algebra(sz, seed))
    checks += check_asymmetric(sz)
    return checks
