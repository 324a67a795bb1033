import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from levelsync.audio import IdealFeatureSequence
from levelsync.errors import EmptyRun, TooFewSegments
from levelsync.generator import GeneratorContext, generate_playable
from levelsync.level import FeatureBounds, Segment, concat, flat_segment
from levelsync.metrics import (
    FUN_LOWER,
    FUN_UPPER,
    SegmentRecord,
    controllability,
    diversity,
    fun_range_score,
    inner_error,
    novelty_scores,
    out_of_range_distance,
    outer_error,
    overall_error,
    synthetic_target_walk,
)
from test_level import brute_force_tpkl

GOLDEN = Path(__file__).parent / "data" / "target_walk_golden.json"


def records(rows):
    """rows of (target, feature, duration); starts are cumulative."""
    out, b = [], 0.0
    for i, (t, f, d) in enumerate(rows, 1):
        out.append(SegmentRecord(i, t, f, b, d))
        b += d
    return out


def fs(values, u=1.0):
    return IdealFeatureSequence(np.asarray(values, dtype=float), u)


class TestErrors:
    def test_inner_zero(self):
        assert inner_error(records([(0.5, 0.5, 4), (0.5, 0.1, 6)]), fs([0.5] * 10)) == 0.0

    def test_inner_step(self):
        f = fs([0.0] * 10 + [1.0] * 10)
        assert inner_error(records([(0.5, 0.5, 20)]), f) == pytest.approx(0.5, abs=1e-12)

    def test_inner_extremal(self):
        assert inner_error(records([(0.0, 0.0, 3), (0.0, 0.0, 5)]), fs([1.0] * 8)) == 1.0

    def test_outer_cases(self):
        assert outer_error(records([(0.3, 0.3, 5)]), time_unit=1.0) == 0.0
        assert outer_error(records([(0.3, 0.4, 5)]), time_unit=1.0) == pytest.approx(0.1)
        assert outer_error(records([(0.3, 0.4, 5), (0.5, 0.2, 5)]), time_unit=1.0) == pytest.approx(0.2)

    def test_overall_hand_sum(self):
        f = fs([0, 0, 0, 0.5, 0.5, 0.5, 0.5, 1, 1])
        recs = records([(0.1, 0.2, 3), (0.5, 0.5, 4), (0.9, 0.6, 2)])
        # |0-.2|*3 + 0*4 + |1-.6|*2 over 9 time units
        assert overall_error(recs, f) == pytest.approx((0.6 + 0.0 + 0.8) / 9, abs=1e-12)
        assert inner_error(recs, f) == pytest.approx((0.3 + 0.0 + 0.2) / 9, abs=1e-12)

    def test_overall_equals_inner_when_exact(self):
        f = fs(np.linspace(0, 1, 30))
        recs = records([(0.2, 0.2, 7), (0.9, 0.9, 11), (0.4, 0.4, 12)])
        assert overall_error(recs, f) == inner_error(recs, f)

    def test_empty(self):
        with pytest.raises(EmptyRun):
            inner_error([], fs([0.5]))
        with pytest.raises(EmptyRun):
            outer_error([])

    def test_hold_past_end(self):
        assert inner_error(records([(0.2, 0.2, 6)]), fs([0.2, 0.6])) == pytest.approx(0.4 * 5 / 6)


run_rows = st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1), st.integers(1, 40).map(lambda k: k * 0.5)),
                    min_size=1, max_size=12)
ideal = st.lists(st.floats(0, 1), min_size=1, max_size=120)


@given(run_rows, ideal)
@settings(max_examples=200, deadline=None)
def test_decomposition_and_triangle(rows, values):
    f = fs(values, 0.5)
    recs = records(rows)
    ei, eo, ea = inner_error(recs, f), outer_error(recs, time_unit=0.5), overall_error(recs, f)
    for e in (ei, eo, ea):
        assert 0.0 <= e <= 1.0 + 1e-12
    assert ea <= ei + eo + 1e-12
    exact = records([(t, t, d) for t, _, d in rows])
    assert abs(overall_error(exact, f) - inner_error(exact, f)) <= 1e-12
    assert outer_error(exact, time_unit=0.5) == 0.0


@given(run_rows, ideal, st.floats(0.1, 10), st.floats(-5, 5))
@settings(max_examples=150, deadline=None)
def test_affine_invariance(rows, values, scale, shift):
    f, recs = fs(values, 0.5), records(rows)
    g = fs(np.asarray(values) * scale + shift, 0.5)
    recs2 = [SegmentRecord(r.index, r.target * scale + shift, r.feature * scale + shift, r.start, r.duration)
             for r in recs]
    b2 = FeatureBounds(shift, scale + shift)
    assert inner_error(recs2, g, b2) == pytest.approx(inner_error(recs, f), abs=1e-9)
    assert overall_error(recs2, g, b2) == pytest.approx(overall_error(recs, f), abs=1e-9)
    assert outer_error(recs2, b2, 0.5) == pytest.approx(outer_error(recs, time_unit=0.5), abs=1e-9)


class TestControllability:
    def test_cases(self, flat, enemy_gap_segment):
        assert controllability(enemy_gap_segment, 5 / 28) == 1.0
        assert controllability(flat, 1.0) == 0.0
        assert controllability(flat, 0.25) == 0.75


class TestFun:
    def test_out_of_range(self):
        assert out_of_range_distance([0.3, 0.5, 0.9]) == 0.0
        assert out_of_range_distance([FUN_UPPER + 0.1]) == pytest.approx(0.1)
        d = out_of_range_distance([FUN_LOWER - 0.05, 0.6, FUN_UPPER + 0.15])
        assert d == pytest.approx((0.05 + 0 + 0.15) / 3)

    def test_novelty_matches_window_oracle(self):
        ctx = GeneratorContext(seed=8)
        level = [generate_playable(ctx, float(t)).segment for t in (0.1, 0.5, 0.3, 0.8, 0.2)]
        full = concat(level)
        expected = []
        for i in range(1, 5):
            cur = Segment(full[:, 28 * i : 28 * (i + 1)])
            ds = [brute_force_tpkl(cur, Segment(full[:, 28 * i - 14 * k - 28 : 28 * i - 14 * k]))
                  for k in range(3) if 28 * i - 14 * k - 28 >= 0]
            expected.append(sum(ds) / len(ds))
        np.testing.assert_allclose(novelty_scores(level), expected, rtol=1e-9)
        # the second segment only has one full window behind it
        assert len(expected) == 4

    def test_identical_segments_score_low_bound(self, flat):
        assert novelty_scores([flat, flat, flat]) == [0.0, 0.0]
        assert fun_range_score([flat, flat]) == pytest.approx(FUN_LOWER)

    def test_too_few(self, flat):
        with pytest.raises(TooFewSegments):
            fun_range_score([flat])


class TestDiversity:
    def test_identical(self, flat):
        assert diversity([[flat, flat], [flat, flat]]) == 0.0

    def test_everywhere_different(self):
        a = Segment(np.zeros((14, 28), dtype=np.int8))
        b = Segment(np.ones((14, 28), dtype=np.int8))
        assert diversity([[a], [b]]) == 1.0

    def test_mean_of_pairs(self, monkeypatch):
        import levelsync.metrics as m
        ratios = {(0, 1): 0.2, (0, 2): 0.4, (1, 2): 0.6}
        levels = [[Segment(np.full((14, 28), k, dtype=np.int8))] for k in range(3)]
        monkeypatch.setattr(m, "tile_difference_ratio", lambda a, b: ratios[(int(a[0, 0]), int(b[0, 0]))])
        assert m.diversity(levels) == pytest.approx(0.4)

    def test_disjoint_regions(self):
        # b flips 7 columns, c flips 14 other columns: pair ratios 1/4, 1/2, 3/4
        a = np.zeros((14, 28), dtype=np.int8)
        b, c = a.copy(), a.copy()
        b[:, :7] = 1
        c[:, 7:21] = 1
        assert diversity([[Segment(a)], [Segment(b)], [Segment(c)]]) == pytest.approx(0.5)

    def test_truncates_to_shorter(self, flat):
        other = Segment(np.ones((14, 28), dtype=np.int8))
        assert diversity([[flat], [flat, other]]) == 0.0

    def test_symmetric(self, flat, pipe_segment, enemy_gap_segment):
        assert diversity([[flat], [pipe_segment]]) == diversity([[pipe_segment], [flat]])
        with pytest.raises(ValueError):
            diversity([[flat]])


class TestWalk:
    def test_zero_sigma_constant(self):
        w = synthetic_target_walk(3, 20, sigma=0.0)
        assert np.all(w == w[0])

    @given(st.integers(0, 10**6), st.floats(0, 1))
    @settings(max_examples=50)
    def test_in_bounds(self, seed, sigma):
        w = synthetic_target_walk(seed, 30, sigma)
        assert np.all((w >= 0) & (w <= 1))

    def test_golden(self):
        ref = json.loads(GOLDEN.read_text())
        got = synthetic_target_walk(ref["seed"], ref["length"], ref["sigma"])
        np.testing.assert_allclose(got, ref["values"], rtol=0, atol=1e-15)
