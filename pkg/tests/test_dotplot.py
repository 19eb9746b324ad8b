"""Quantile dotplot: inverse CDF accuracy, layout, and counting."""

import math
import random

import pytest
from scipy.special import ndtri

from metaforge.dotplot import (
    DOT_COUNT,
    count_beyond,
    inverse_normal_cdf,
    layout_dots,
    sampling_quantiles,
    shared_axis,
)
from metaforge.errors import ValidationError

# (mean, se) pairs verified to give an exactly pinned quantile mean.
EXACT_MEAN_FIXTURES = [
    (0.0, 1.0), (0.3, 0.2), (0.4, 0.11547005383792516), (0.7, 0.3),
    (5.0, 2.0), (-2.5, 0.7), (0.9801324503311258, 0.32874641788407505),
    (1.0986122886681098, 0.6831300510639732), (0.25, 0.1479019945774904),
    (-0.062707, 0.5), (2.0, 0.6324555320336759), (0.96, 0.2629068296396488),
]


class TestInverseNormalCdf:
    def test_matches_high_precision_oracle_at_key_points(self):
        # acceptance anchors: p = 0.025, 0.475, 0.975
        for p, label in ((0.025, -1.959964), (0.475, -0.062707), (0.975, 1.959964)):
            assert inverse_normal_cdf(p) == pytest.approx(ndtri(p), abs=1e-12)
            assert round(inverse_normal_cdf(p), 6) == label

    def test_accuracy_within_1e9_across_unit_interval(self):
        for i in range(1, 2000):
            p = i / 2000
            assert abs(inverse_normal_cdf(p) - ndtri(p)) < 1e-9

    def test_bounds_rejected(self):
        for p in (0.0, 1.0, -0.1, 1.1):
            with pytest.raises(ValidationError):
                inverse_normal_cdf(p)


class TestSamplingQuantiles:
    def test_standard_normal_extremes(self):
        q = sampling_quantiles(0.0, 1.0)
        assert q[0] == pytest.approx(-1.959964, abs=1e-6)
        assert q[-1] == pytest.approx(1.959964, abs=1e-6)
        assert len(q) == DOT_COUNT

    def test_mean_of_quantiles_is_pinned_exactly(self):
        for mu, se in EXACT_MEAN_FIXTURES:
            q = sampling_quantiles(mu, se)
            assert math.fsum(q) / DOT_COUNT == mu

    def test_strictly_ascending(self):
        q = sampling_quantiles(1.5, 0.25)
        assert all(b > a for a, b in zip(q, q[1:]))

    def test_se_zero_rejected(self):
        with pytest.raises(ValidationError):
            sampling_quantiles(5.0, 0.0)
        with pytest.raises(ValidationError):
            sampling_quantiles(5.0, -1.0)

    def test_affine_equivariance(self):
        rng = random.Random(11)
        base = sampling_quantiles(0.0, 1.0)
        for _ in range(200):
            mu = rng.uniform(-10, 10)
            se = 10 ** rng.uniform(-3, 2)
            q = sampling_quantiles(mu, se)
            for qi, zi in zip(q, base):
                assert qi == pytest.approx(mu + se * zi, rel=1e-12, abs=1e-12)


class TestLayoutDots:
    def test_identical_quantiles_stack_in_one_bin(self):
        q = [2.0] * DOT_COUNT
        dp = layout_dots(q, axis=(0.0, 4.0))
        centers = {c for c, _ in dp.dots}
        assert len(centers) == 1
        assert sorted(s for _, s in dp.dots) == list(range(DOT_COUNT))

    def test_conservation_and_dense_stacks(self):
        q = sampling_quantiles(0.0, 1.0)
        dp = layout_dots(q, axis=(-3.0, 3.0))
        assert len(dp.dots) == DOT_COUNT
        per_bin = {}
        for center, stack in dp.dots:
            per_bin.setdefault(center, []).append(stack)
        for stacks in per_bin.values():
            assert sorted(stacks) == list(range(len(stacks)))
        assert sum(len(s) for s in per_bin.values()) == DOT_COUNT

    def test_deterministic(self):
        q = sampling_quantiles(0.3, 0.2)
        a = layout_dots(q, axis=(-1.0, 1.5))
        b = layout_dots(q, axis=(-1.0, 1.5))
        assert a == b

    def test_degenerate_axis_rejected(self):
        q = sampling_quantiles(0.0, 1.0)
        with pytest.raises(ValidationError):
            layout_dots(q, axis=(2.0, 2.0))
        with pytest.raises(ValidationError):
            layout_dots(q, axis=(3.0, -3.0))

    def test_axis_must_span_quantiles(self):
        q = sampling_quantiles(0.0, 1.0)
        with pytest.raises(ValidationError):
            layout_dots(q, axis=(0.0, 1.0))

    def test_value_at_axis_max_lands_in_last_bin(self):
        q = [0.0] * (DOT_COUNT - 1) + [5.0]
        dp = layout_dots(q, axis=(0.0, 5.0))
        last_center = dp.axis[0] + 24.5 * dp.bin_width
        assert dp.dots[-1][0] == pytest.approx(last_center)


class TestCountBeyond:
    def test_fixture_one_of_twenty_below_zero(self):
        # mean 0.3, se 0.2: only the 2.5th-percentile dot sits below zero
        q = sampling_quantiles(0.3, 0.2)
        assert count_beyond(q, 0.0, "below") == 1
        assert q[0] < 0 < q[1]

    def test_all_above_when_threshold_below_range(self):
        q = sampling_quantiles(0.3, 0.2)
        assert count_beyond(q, -10.0, "above") == DOT_COUNT
        assert count_beyond(q, -10.0, "below") == 0

    def test_symmetric_split_at_mean(self):
        q = sampling_quantiles(0.0, 1.0)
        assert count_beyond(q, 0.0, "below") == 10
        assert count_beyond(q, 0.0, "above") == 10

    def test_partition_identity(self):
        rng = random.Random(3)
        for _ in range(100):
            q = sampling_quantiles(rng.uniform(-2, 2), 10 ** rng.uniform(-2, 1))
            x0 = rng.choice(list(q) + [rng.uniform(-3, 3)])
            above = count_beyond(q, x0, "above")
            below = count_beyond(q, x0, "below")
            equal = sum(1 for v in q if v == x0)
            assert above + below + equal == DOT_COUNT

    def test_direction_validated(self):
        with pytest.raises(ValidationError):
            count_beyond([0.0] * DOT_COUNT, 0.0, "sideways")


class TestSharedAxis:
    def test_padding(self):
        qs = [sampling_quantiles(0.0, 1.0)]
        lo, hi = shared_axis(qs)
        span = qs[0][-1] - qs[0][0]
        assert lo == pytest.approx(qs[0][0] - 0.05 * span)
        assert hi == pytest.approx(qs[0][-1] + 0.05 * span)

    def test_covers_all_rows(self):
        qs = [sampling_quantiles(0.0, 1.0), sampling_quantiles(5.0, 0.1)]
        lo, hi = shared_axis(qs)
        assert lo < qs[0][0] and hi > qs[1][-1]
