"""Per-study effect estimates and sampling variances.

Four effect families are supported: raw and standardized mean
differences for continuous outcomes, risk differences and log odds
ratios for dichotomous outcomes, plus a standardized mean change for
within-subjects designs. Every function is pure and returns an
EffectEstimate carrying the effect value y and its sampling variance v.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateVarianceError, ValidationError

# Effect-family tags. SMD uses the small-sample (Hedges) correction always.
MD = "MD"
SMD_G = "SMD_g"
RD = "RD"
LN_OR = "lnOR"

EFFECT_KINDS = (MD, SMD_G, RD, LN_OR)


@dataclass(frozen=True)
class ContinuousArm:
    """Summary statistics for one arm measured on a continuous scale.

    sd == 0 is tolerated at construction so the degenerate branches can
    be reported where they matter (zero pooled sd, zero variance);
    evidence-table entry rejects sd <= 0 up front.
    """

    mean: float
    sd: float
    n: int

    def __post_init__(self):
        if not (isinstance(self.n, int) and self.n >= 2):
            raise ValidationError(f"arm n must be an integer >= 2, got {self.n}")
        if not self.sd >= 0:
            raise ValidationError(f"arm sd must be >= 0, got {self.sd}")
        for name in ("mean", "sd"):
            v = getattr(self, name)
            if math.isnan(v) or math.isinf(v):
                raise ValidationError(f"arm {name} must be finite, got {v}")


@dataclass(frozen=True)
class DichotomousArm:
    """Event count and size for one arm with a yes/no outcome."""

    events: int
    n: int

    def __post_init__(self):
        if not (isinstance(self.n, int) and self.n >= 1):
            raise ValidationError(f"arm n must be an integer >= 1, got {self.n}")
        if not (isinstance(self.events, int) and 0 <= self.events <= self.n):
            raise ValidationError(
                f"arm events must satisfy 0 <= events <= n, got events={self.events}, n={self.n}")


@dataclass(frozen=True)
class EffectEstimate:
    """One study result's effect value and sampling variance.

    v == 0 marks a degenerate (zero-variance) estimate: it is kept in
    the data model but barred from pooling, where weights are 1/v.
    """

    kind: str
    y: float
    v: float
    original_units: str | None = None
    correction_applied: str | None = None

    def __post_init__(self):
        if self.kind not in EFFECT_KINDS:
            raise ValidationError(f"unknown effect kind {self.kind!r}")
        if self.v < 0 or math.isnan(self.v) or math.isinf(self.v):
            raise ValidationError(f"sampling variance must be >= 0 and finite, got {self.v}")
        if math.isnan(self.y) or math.isinf(self.y):
            raise ValidationError(f"effect value must be finite, got {self.y}")

    @property
    def pooled_eligible(self) -> bool:
        return self.v > 0.0

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "y": self.y,
            "v": self.v,
            "original_units": self.original_units,
            "correction_applied": self.correction_applied,
        }


def mean_difference(t: ContinuousArm, c: ContinuousArm,
                    units: str | None = None) -> EffectEstimate:
    """Raw mean difference: y = t.mean - c.mean, v = sd_t^2/n_t + sd_c^2/n_c."""
    y = t.mean - c.mean
    v = t.sd ** 2 / t.n + c.sd ** 2 / c.n
    note = "zero sampling variance; not eligible for pooling" if v == 0.0 else None
    return EffectEstimate(kind=MD, y=y, v=v, original_units=units,
                          correction_applied=note)


def standardized_mean_difference(t: ContinuousArm, c: ContinuousArm,
                                 units: str | None = None) -> EffectEstimate:
    """Standardized mean difference with the Hedges small-sample correction.

    d = (mean_t - mean_c) / s_p, pooled over both arms' sds;
    J = 1 - 3/(4*df - 1) with df = n_t + n_c - 2;
    y = J*d;  v = J^2 * ((n_t + n_c)/(n_t*n_c) + d^2/(2*(n_t + n_c))).
    """
    df = t.n + c.n - 2
    sp2 = ((t.n - 1) * t.sd ** 2 + (c.n - 1) * c.sd ** 2) / df
    if sp2 <= 0:
        raise DegenerateVarianceError("pooled sd is zero; effect is not standardizable")
    d = (t.mean - c.mean) / math.sqrt(sp2)
    j = 1.0 - 3.0 / (4.0 * df - 1.0)
    y = j * d
    v = j * j * ((t.n + c.n) / (t.n * c.n) + d * d / (2.0 * (t.n + c.n)))
    return EffectEstimate(kind=SMD_G, y=y, v=v, original_units=units)


def risk_difference(t: DichotomousArm, c: DichotomousArm) -> EffectEstimate:
    """Risk difference: y = p_t - p_c, v = p_t(1-p_t)/n_t + p_c(1-p_c)/n_c.

    Arms with no variation in either group produce v = 0; the estimate is
    flagged so the pooling layer can exclude it with a visible warning.
    """
    pt = t.events / t.n
    pc = c.events / c.n
    y = pt - pc
    v = pt * (1.0 - pt) / t.n + pc * (1.0 - pc) / c.n
    note = "zero sampling variance; not eligible for pooling" if v == 0.0 else None
    return EffectEstimate(kind=RD, y=y, v=v, correction_applied=note)


def log_odds_ratio(t: DichotomousArm, c: DichotomousArm) -> EffectEstimate:
    """Log odds ratio from the 2x2 table, with a 0.5 continuity correction.

    If any cell is zero, 0.5 is added to all four cells and the
    correction is recorded on the estimate.
    """
    a = float(t.events)
    b = float(t.n - t.events)
    c0 = float(c.events)
    d = float(c.n - c.events)
    note = None
    if min(a, b, c0, d) == 0.0:
        a, b, c0, d = a + 0.5, b + 0.5, c0 + 0.5, d + 0.5
        note = "continuity correction: 0.5 added to all cells"
    y = math.log((a * d) / (b * c0))
    v = 1.0 / a + 1.0 / b + 1.0 / c0 + 1.0 / d
    return EffectEstimate(kind=LN_OR, y=y, v=v, correction_applied=note)


def standardized_mean_change(pre_mean: float, post_mean: float, sd_pre: float,
                             n: int, r: float | None = None,
                             units: str | None = None) -> EffectEstimate:
    """Within-subjects standardized change, Hedges-corrected.

    d = (post - pre)/sd_pre;  J = 1 - 3/(4*(n-1) - 1);  y = J*d;
    v = J^2 * (2*(1-r)/n + d^2/(2n)).
    An unreported pre/post correlation is imputed as r = 0.5 and the
    imputation is recorded on the estimate.
    """
    if not (isinstance(n, int) and n >= 2):
        raise ValidationError(f"n must be an integer >= 2, got {n}")
    if not sd_pre > 0:
        raise ValidationError(f"sd_pre must be > 0, got {sd_pre}")
    note = None
    if r is None:
        r = 0.5
        note = "pre/post correlation unreported; imputed r = 0.5"
    if not -1.0 < r < 1.0:
        raise ValidationError(f"pre/post correlation must lie in (-1, 1), got {r}")
    d = (post_mean - pre_mean) / sd_pre
    j = 1.0 - 3.0 / (4.0 * (n - 1) - 1.0)
    y = j * d
    v = j * j * (2.0 * (1.0 - r) / n + d * d / (2.0 * n))
    return EffectEstimate(kind=SMD_G, y=y, v=v, original_units=units,
                          correction_applied=note)


def to_original_units(estimate: EffectEstimate, arms: dict) -> dict:
    """Express a row's effect in original measurement units for display.

    `arms` is the stored arm-statistics record for the row. MD rows pass
    through; SMD rows are re-derived as a raw (mean) difference from the
    retained arm data; RD/lnOR rows are already in interpretable units
    and come back marked not convertible. Pooled rows never reach here.
    """
    units = estimate.original_units
    if estimate.kind == MD:
        return {"convertible": True, "y": estimate.y, "v": estimate.v, "units": units}
    if estimate.kind in (RD, LN_OR):
        return {"convertible": False, "units": None,
                "reason": f"{estimate.kind} is already in interpretable units"}
    # SMD_g: rebuild the raw difference from retained arm statistics.
    if {"t_mean", "t_sd", "t_n", "c_mean", "c_sd", "c_n"} <= arms.keys():
        raw = mean_difference(
            ContinuousArm(arms["t_mean"], arms["t_sd"], arms["t_n"]),
            ContinuousArm(arms["c_mean"], arms["c_sd"], arms["c_n"]),
        )
        return {"convertible": True, "y": raw.y, "v": raw.v, "units": units}
    if {"mean_pre", "mean_post", "sd_pre", "n"} <= arms.keys():
        r = arms.get("r_prepost")
        if r is None:
            r = 0.5
        n = arms["n"]
        y = arms["mean_post"] - arms["mean_pre"]
        v = 2.0 * arms["sd_pre"] ** 2 * (1.0 - r) / n
        return {"convertible": True, "y": y, "v": v, "units": units}
    return {"convertible": False, "units": None,
            "reason": "arm statistics not retained for this row"}
