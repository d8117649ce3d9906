import json
import math
from fractions import Fraction

import numpy as np
import pytest

from checkerboard.errors import SpecError
from checkerboard.exact import lineage_event_probability
from checkerboard.forests import EVENTS, IntervalSpec, empty_interval_indicator, event_indicator, interval_region, sample_choices
from checkerboard.kernels import KernelSpec
from checkerboard.lattice import WeightField
from checkerboard.montecarlo import (
    SHARD,
    EstimatorResult,
    estimate_correlation,
    estimate_event,
    event_indicators,
    occupancy_indicator,
    verification_report,
)
from checkerboard.pfaffian import empty_interval_probability
from checkerboard.pointprocess import SiteSet, correlation_pfaffian, gap_probability

H = Fraction(1, 2)


class TestIndicators:
    @pytest.mark.parametrize(
        "field, spec",
        [
            (WeightField.constant(0.4), IntervalSpec(8, (H, 5 * H, 7 * H, 11 * H))),
            (WeightField.constant(Fraction(1, 3)), IntervalSpec(5, (H, 3 * H, 3 * H, 7 * H))),
            (WeightField.polya(), IntervalSpec(14, (11 * H, 13 * H, 15 * H, 19 * H), entrance=10)),
        ],
    )
    def test_vectorised_matches_scalar(self, field, spec):
        samples = np.arange(300)
        ind = event_indicators(field, spec, samples, seed=17)
        region = interval_region(spec)
        for s in samples:
            ch = sample_choices(field, region, 17, int(s))
            for ev in EVENTS:
                assert ind[ev][s] == event_indicator(ch, spec, ev)

    def test_events_agree_per_sample(self):
        field = WeightField.constant(0.3)
        spec = IntervalSpec(10, (H, 7 * H, 9 * H, 11 * H))
        ind = event_indicators(field, spec, np.arange(20_000), seed=2)
        assert np.array_equal(ind[EVENTS[0]], ind[EVENTS[1]])
        assert np.array_equal(ind[EVENTS[0]], ind[EVENTS[2]])

    def test_occupancy_matches_scalar(self):
        field = WeightField.constant(H)
        S = SiteSet(5, (0, 1, 3))
        occ = occupancy_indicator(field, S, np.arange(200), seed=4)
        for s in range(200):
            spec = IntervalSpec.from_intervals(5, [(y - H, y + H) for y in S.sites])
            ch = sample_choices(field, interval_region(spec), 4, s)
            # a site is occupied exactly when its unit interval is not empty
            full = all(not empty_interval_indicator(ch, IntervalSpec(5, (y - H, y + H))) for y in S.sites)
            assert occ[s] == full


class TestEstimators:
    def test_result_stderr(self):
        r = EstimatorResult.from_count(250, 1000, 0, "x")
        assert r.mean == 0.25
        assert r.stderr == pytest.approx(math.sqrt(0.25 * 0.75 / 1000))

    def test_deterministic_field(self):
        r = estimate_event(WeightField.constant(1), IntervalSpec(4, (H, 5 * H)), "empty_interval", 5000, 3)
        assert r.mean in (0.0, 1.0) and r.stderr == 0.0

    def test_thread_count_does_not_matter(self):
        field = WeightField.constant(H)
        spec = IntervalSpec(6, (H, 5 * H))
        n = 3 * SHARD + 123
        one = estimate_event(field, spec, "empty_interval", n, 8, threads=1)
        four = estimate_event(field, spec, "empty_interval", n, 8, threads=4)
        assert one == four

    def test_environment_threads(self, monkeypatch):
        field = WeightField.constant(H)
        spec = IntervalSpec(4, (H, 3 * H))
        base = estimate_event(field, spec, "pairwise_coalescence", 2 * SHARD, 5)
        monkeypatch.setenv("CHECKERBOARD_THREADS", "3")
        assert estimate_event(field, spec, "pairwise_coalescence", 2 * SHARD, 5) == base

    def test_seeds_differ(self):
        field = WeightField.constant(H)
        spec = IntervalSpec(6, (H, 5 * H))
        a = estimate_event(field, spec, "empty_interval", 10_000, 1)
        b = estimate_event(field, spec, "empty_interval", 10_000, 2)
        assert a.successes != b.successes

    def test_errors(self):
        field = WeightField.constant(H)
        spec = IntervalSpec(2, (H, 3 * H))
        with pytest.raises(SpecError):
            estimate_event(field, spec, "empty_interval", 0, 1)
        with pytest.raises(ValueError):
            estimate_event(field, spec, "occupied", 10, 1)

    def test_against_pfaffian(self):
        field = WeightField.constant(Fraction(1, 3))
        spec = IntervalSpec(7, (H, 5 * H, 7 * H, 9 * H))
        ref = empty_interval_probability(KernelSpec.biased(Fraction(1, 3), 7), spec)
        r = estimate_event(field, spec, "total_annihilation", 200_000, 11)
        assert abs(r.mean - float(ref)) <= 4 * r.stderr

    def test_coverage_calibration(self):
        field = WeightField.constant(H)
        spec = IntervalSpec(4, (H, 5 * H))
        exact = float(lineage_event_probability(field, spec))
        zs = []
        for seed in range(200):
            r = estimate_event(field, spec, "empty_interval", 2000, 1000 + seed)
            zs.append(abs(r.mean - exact) / r.stderr)
        assert np.mean(np.array(zs) > 2) <= 0.10


class TestCorrelationEstimates:
    def test_entrance_diagonal(self):
        r = estimate_correlation(WeightField.constant(H), SiteSet(0, (0, 1, 5)), 1000, 1)
        assert r.mean == 1.0 and r.stderr == 0.0

    def test_single_site(self):
        field = WeightField.constant(H)
        S = SiteSet(6, (2,))
        ref = 1 - gap_probability(KernelSpec.biased(H, 6), S)
        r = estimate_correlation(field, S, 100_000, 3)
        assert abs(r.mean - float(ref)) <= 4 * r.stderr

    def test_two_sites(self):
        field = WeightField.constant(Fraction(1, 3))
        S = SiteSet(6, (1, 2))
        ref = correlation_pfaffian(KernelSpec.biased(Fraction(1, 3), 6), S)
        r = estimate_correlation(field, S, 100_000, 3)
        assert abs(r.mean - float(ref)) <= 4 * r.stderr


class TestReport:
    def test_exact_rows(self):
        field = WeightField.constant(H)
        specs = [IntervalSpec(4, (H, 3 * H)), IntervalSpec(4, (H, 3 * H, 3 * H, 5 * H))]
        rep = verification_report(field, specs, samples=20_000, seed=1)
        assert all(r.exact_minus_pfaffian == 0 for r in rep.rows)
        assert not rep.flagged
        lines = rep.to_csv().splitlines()
        assert lines[0].startswith("diagonal,entrance,endpoints,exact,pfaffian")
        assert len(lines) == 3
        meta = json.loads(rep.to_json())["meta"]
        assert meta["seed"] == 1 and meta["samples"] == 20_000

    def test_deterministic_field_has_zero_z(self):
        for p in (0, 1):
            rep = verification_report(WeightField.constant(p), [IntervalSpec(3, (H, 5 * H))], samples=1000, seed=0)
            row = rep.rows[0]
            assert row.mc_stderr == 0.0 and row.z == 0.0
            assert row.exact == row.pfaffian

    def test_wrong_kernel_is_flagged(self):
        field = WeightField.constant(H)
        spec = IntervalSpec(6, (H, 5 * H))
        rep = verification_report(field, [spec], KernelSpec.biased(Fraction(1, 5), 6), samples=100_000, seed=0)
        assert rep.flagged

    def test_skip_simulation(self):
        rep = verification_report(WeightField.constant(H), [IntervalSpec(3, (H, 3 * H))], samples=0)
        assert rep.rows[0].mc_mean is None
        assert not rep.flagged

    def test_float_field_has_no_exact_column(self):
        rep = verification_report(WeightField.constant(0.5), [IntervalSpec(3, (H, 3 * H))], samples=1000, seed=0)
        assert rep.rows[0].exact is None
