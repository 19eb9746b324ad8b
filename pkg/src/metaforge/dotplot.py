"""Quantile dotplots for normal sampling distributions.

A pooled or per-study estimate (mean, se) is shown as 20 stacked dots,
one per quantile of the sampling distribution, so probabilities can be
read by counting dots. This module computes the quantile values, the
stacked layout geometry on a shared axis, and threshold counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ValidationError

DOT_COUNT = 20
BIN_COUNT = 25
AXIS_PAD_FRACTION = 0.05

# Acklam's rational approximation to the standard normal inverse CDF
# (relative error < 1.15e-9 before refinement).
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _norm_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def inverse_normal_cdf(p: float) -> float:
    """Standard normal inverse CDF, |error| well below 1e-9.

    Rational approximation with one Newton refinement step against the
    erfc-based CDF, so the result is accurate without external deps.
    """
    if not 0.0 < p < 1.0:
        raise ValidationError(f"inverse CDF requires 0 < p < 1, got {p}")
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = ((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
             / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    elif p > 1.0 - _P_LOW:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        x = -((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
              / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    else:
        q = p - 0.5
        r = q * q
        x = ((((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
             / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0))
    # Newton step: x -= (CDF(x) - p) / pdf(x)
    err = _norm_cdf(x) - p
    x -= err * _SQRT_2PI * math.exp(0.5 * x * x)
    return x


@dataclass(frozen=True)
class DotplotData:
    """20 quantiles plus their stacked-dot layout on a shared axis."""

    quantiles: tuple[float, ...]
    dots: tuple[tuple[float, int], ...]  # (bin_center, stack_index) per quantile
    bin_width: float
    axis: tuple[float, float]

    def to_dict(self) -> dict:
        return {
            "quantiles": list(self.quantiles),
            "dots": [{"bin_center": c, "stack_index": s} for c, s in self.dots],
            "bin_width": self.bin_width,
            "axis": {"min": self.axis[0], "max": self.axis[1]},
        }


def sampling_quantiles(mean: float, se: float) -> tuple[float, ...]:
    """Quantiles of N(mean, se) at p_i = (i - 0.5)/20 for i = 1..20.

    The upper half mirrors the lower half around the mean, so the pair
    (q_i, q_{21-i}) sums to exactly 2*mean and the quantile mean stays
    pinned to the input mean.
    """
    if not (isinstance(se, (int, float)) and se > 0.0) or math.isinf(se):
        raise ValidationError(f"sampling_quantiles requires se > 0, got {se}")
    if math.isnan(mean) or math.isinf(mean):
        raise ValidationError(f"sampling_quantiles requires finite mean, got {mean}")
    q = [0.0] * DOT_COUNT
    two_mean = mean + mean
    for i in range(1, DOT_COUNT // 2 + 1):
        z = inverse_normal_cdf((i - 0.5) / DOT_COUNT)  # z < 0 for i <= 10
        lo = mean + se * z
        q[i - 1] = lo
        q[DOT_COUNT - i] = two_mean - lo
    return tuple(q)


def layout_dots(quantiles: tuple[float, ...] | list[float],
                axis: tuple[float, float]) -> DotplotData:
    """Stack quantiles into 25 equal bins across `axis`.

    Bins are half-open [left, right) anchored at axis min; the last bin
    is closed. Stack index is arrival order in ascending quantile order,
    dense from 0 within each bin.
    """
    qs = tuple(float(v) for v in quantiles)
    if len(qs) != DOT_COUNT:
        raise ValidationError(f"expected {DOT_COUNT} quantiles, got {len(qs)}")
    if any(b < a for a, b in zip(qs, qs[1:])):
        raise ValidationError("quantiles must be ascending")
    lo, hi = float(axis[0]), float(axis[1])
    if not hi > lo:
        raise ValidationError(f"degenerate axis ({lo}, {hi})")
    if qs[0] < lo or qs[-1] > hi:
        raise ValidationError("axis does not span the quantiles")
    width = (hi - lo) / BIN_COUNT
    heights = [0] * BIN_COUNT
    dots = []
    for v in qs:
        b = int((v - lo) / width)
        if b >= BIN_COUNT:  # v == axis max (or float spill): last bin is closed
            b = BIN_COUNT - 1
        center = lo + (b + 0.5) * width
        dots.append((center, heights[b]))
        heights[b] += 1
    return DotplotData(quantiles=qs, dots=tuple(dots), bin_width=width, axis=(lo, hi))


def count_beyond(quantiles: tuple[float, ...] | list[float],
                 x0: float, direction: str) -> int:
    """Number of quantiles strictly beyond x0 in `direction` (above/below)."""
    if direction not in ("above", "below"):
        raise ValidationError(f"direction must be 'above' or 'below', got {direction!r}")
    if direction == "above":
        return sum(1 for v in quantiles if v > x0)
    return sum(1 for v in quantiles if v < x0)


def shared_axis(quantile_sets: list[tuple[float, ...]],
                pad: float = AXIS_PAD_FRACTION) -> tuple[float, float]:
    """Group axis: [min, max] over all row quantiles, padded each side."""
    if not quantile_sets:
        raise ValidationError("shared_axis requires at least one quantile set")
    lo = min(qs[0] for qs in quantile_sets)
    hi = max(qs[-1] for qs in quantile_sets)
    span = hi - lo
    if span <= 0.0:
        span = abs(hi) if hi != 0 else 1.0  # all-identical fallback keeps axis non-degenerate
    return lo - pad * span, hi + pad * span
