from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from checkerboard.errors import ConeNotCovered, SpecError
from checkerboard.forests import (
    EVENTS,
    ChoiceConfiguration,
    IntervalSpec,
    backward_lineage,
    cluster_sizes,
    empty_interval_indicator,
    event_indicator,
    forward_boundaries,
    forward_trajectory,
    hull_region,
    interval_region,
    pairwise_coalescence,
    sample_choices,
    total_annihilation,
    trajectories_csv,
)
from checkerboard.lattice import LatticeVertex, WeightField

H = Fraction(1, 2)


def all_choices(region, west):
    return ChoiceConfiguration({key: west for key in region})


class TestIntervalSpec:
    def test_basic(self):
        spec = IntervalSpec(5, (H, 5 * H, 5 * H, 9 * H))
        assert spec.n == 2
        assert spec.horizon == 5
        assert spec.indices == [0, 2, 2, 4]
        assert spec.intervals == [(H, 5 * H), (5 * H, 9 * H)]

    def test_from_intervals(self):
        spec = IntervalSpec.from_intervals(4, [("1/2", "3/2"), ("7/2", "9/2")], entrance=1)
        assert spec.endpoints == (H, 3 * H, 7 * H, 9 * H)
        assert spec.horizon == 3

    @pytest.mark.parametrize(
        "endpoints",
        [(H,), (3 * H, H), (H, 5 * H, 3 * H, 7 * H), (H, H)],
    )
    def test_rejects_bad_endpoints(self, endpoints):
        with pytest.raises(SpecError):
            IntervalSpec(4, endpoints)

    def test_region_sizes(self):
        spec = IntervalSpec(3, (H, 3 * H))
        # band of width 2, 3, 4 on diagonals 3, 2, 1
        assert len(interval_region(spec)) == 2 + 3 + 4
        two = IntervalSpec(3, (H, 3 * H, 7 * H, 9 * H))
        assert interval_region(two) <= hull_region(two)


class TestDeterministicFields:
    def test_all_west_moves_every_boundary(self):
        spec = IntervalSpec(3, (H, 7 * H))
        ch = all_choices(hull_region(spec), True)
        traj = forward_trajectory(ch, (-2, 3), 3)
        assert traj[0] == [-2, -1, 0, 1, 2, 3]
        assert traj[-1] == [1, 2, 3]

    def test_all_south_freezes(self):
        spec = IntervalSpec(3, (H, 7 * H))
        ch = all_choices(hull_region(spec), False)
        assert forward_boundaries(ch, (-2, 3), 3) == [1, 2, 3]
        assert not empty_interval_indicator(ch, spec)
        assert not pairwise_coalescence(ch, spec)

    def test_merge(self):
        # left boundary steps East onto a right boundary that stays
        ch = ChoiceConfiguration({(1, 0): True, (1, 1): False})
        assert forward_boundaries(ch, (0, 1), 1) == [1]

    def test_lineage_path(self):
        ch = ChoiceConfiguration({(3, 2): True, (2, 1): False, (1, 1): True})
        lin = backward_lineage(ch, LatticeVertex.zprime(3, 2), 3)
        assert [v.index for v in lin.path] == [2, 1, 1, 0]
        assert lin.end == LatticeVertex.zprime(0, 0)
        assert ch.choice(LatticeVertex.zprime(2, 1)) == "S"

    def test_missing_choice(self):
        ch = ChoiceConfiguration({})
        with pytest.raises(ConeNotCovered):
            ch.is_west(1, 0)
        spec = IntervalSpec(2, (H, 3 * H))
        with pytest.raises(ConeNotCovered):
            empty_interval_indicator(ch, spec, window=(1, 1))


class TestSampling:
    def test_choice_independent_of_region(self, half):
        small = IntervalSpec(3, (H, 3 * H))
        big = IntervalSpec(3, (-5 * H, 9 * H))
        a = sample_choices(half, interval_region(small), seed=9, sample=4)
        b = sample_choices(half, hull_region(big), seed=9, sample=4)
        assert all(a.west[key] == b.west[key] for key in a.west)

    def test_seed_changes_choices(self, half):
        region = hull_region(IntervalSpec(6, (H, 13 * H)))
        a = sample_choices(half, region, seed=1)
        b = sample_choices(half, region, seed=2)
        assert a.west != b.west

    def test_cluster_sizes(self):
        assert cluster_sizes([0, 0, 1, 3, 3, 3]) == [2, 1, 3]


class TestDuality:
    @settings(max_examples=60, deadline=None)
    @given(
        seed=st.integers(0, 2**32),
        T=st.integers(1, 7),
        widths=st.lists(st.integers(1, 3), min_size=1, max_size=3),
        gaps=st.lists(st.integers(0, 2), min_size=3, max_size=3),
        p=st.sampled_from([0.2, 0.5, 0.7]),
    )
    def test_three_events_agree(self, seed, T, widths, gaps, p):
        pts, x = [], H
        for w, g in zip(widths, gaps):
            pts += [x, x + w]
            x += w + g
        spec = IntervalSpec(T, tuple(pts))
        ch = sample_choices(WeightField.constant(p), interval_region(spec), seed)
        values = {ev: event_indicator(ch, spec, ev) for ev in EVENTS}
        assert len(set(values.values())) == 1

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32), T=st.integers(1, 8), width=st.integers(1, 4))
    def test_gap_between_lineages_is_preserved(self, seed, T, width):
        spec = IntervalSpec(T, (H, H + width))
        ch = sample_choices(WeightField.constant(H), interval_region(spec), seed)
        ka, kb = spec.indices
        traj = forward_trajectory(ch, (ka + 1 - T, kb), T)
        la = backward_lineage(ch, LatticeVertex.zprime(T, ka), T).path[::-1]
        lb = backward_lineage(ch, LatticeVertex.zprime(T, kb), T).path[::-1]
        apart = la[0] != lb[0]
        for n in range(T + 1):
            a, b = la[n].index, lb[n].index
            between = [w for w in traj[n] if a < w <= b]
            assert bool(between) == apart

    def test_total_annihilation_vs_pairwise_with_touching(self, half):
        spec = IntervalSpec(4, (H, 3 * H, 3 * H, 5 * H))
        for s in range(200):
            ch = sample_choices(half, interval_region(spec), 5, s)
            assert total_annihilation(ch, spec) == pairwise_coalescence(ch, spec) == empty_interval_indicator(ch, spec)


def test_trajectories_csv(half):
    spec = IntervalSpec(2, (H, 3 * H))
    ch = sample_choices(half, hull_region(spec), 0)
    text = trajectories_csv(ch, spec)
    lines = text.splitlines()
    assert lines[0] == "kind,id,diagonal,position"
    assert sum(1 for l in lines if l.startswith("lineage")) == 2 * 3
