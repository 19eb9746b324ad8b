"""Random-effects pooling per study group.

DerSimonian-Laird closed-form estimator: fixed-effect weights give the
heterogeneity statistic Q and the between-study variance tau^2, then
random-effects weights 1/(v_i + tau^2) give the pooled mean and its
standard error. Sensitivity analysis re-pools under inclusion masks or
with each study left out in turn.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import EmptyGroupError, IncompatibleKindsError, ValidationError

Z_95 = 1.959964  # normal quantile for the 95% interval


@dataclass(frozen=True)
class StudyEstimate:
    """Pooling input: one result's effect value y and sampling variance v.

    `kind` tags the effect family so mixed-family groups are refused;
    None means untagged (trusted homogeneous).
    """

    result_id: str
    y: float
    v: float
    kind: str | None = None

    def __post_init__(self):
        if not self.v > 0:
            raise ValidationError(
                f"study estimate variance must be > 0, got {self.v} for {self.result_id!r}")


@dataclass(frozen=True)
class PooledResult:
    """Pooled mean with heterogeneity statistics for one group."""

    mu: float
    se: float
    ci95: tuple[float, float]
    tau2: float
    Q: float
    I2: float
    k: int

    def to_dict(self) -> dict:
        return {
            "mu": self.mu,
            "se": self.se,
            "ci95": [self.ci95[0], self.ci95[1]],
            "tau2": self.tau2,
            "Q": self.Q,
            "I2": self.I2,
            "k": self.k,
        }


def _check_kinds(estimates: Sequence[StudyEstimate]) -> None:
    kinds = {e.kind for e in estimates if e.kind is not None}
    if len(kinds) > 1:
        raise IncompatibleKindsError(
            "cannot pool mixed effect families: " + ", ".join(sorted(kinds)))


def pool_random_effects(estimates: Sequence[StudyEstimate]) -> PooledResult:
    """DerSimonian-Laird pooled estimate over k >= 1 studies.

    w_i = 1/v_i; Q = sum w_i (y_i - y_FE)^2; C = sum w - sum w^2 / sum w;
    tau2 = max(0, (Q - (k-1))/C), zero for k = 1; random weights
    1/(v_i + tau2) give mu and se = sqrt(1/sum w*).
    """
    k = len(estimates)
    if k == 0:
        raise EmptyGroupError("cannot pool an empty group")
    _check_kinds(estimates)
    ys = [e.y for e in estimates]
    vs = [e.v for e in estimates]

    w = [1.0 / v for v in vs]
    sum_w = math.fsum(w)
    y_fe = math.fsum(wi * yi for wi, yi in zip(w, ys)) / sum_w
    q = math.fsum(wi * (yi - y_fe) ** 2 for wi, yi in zip(w, ys))
    if k == 1:
        tau2 = 0.0
        q = 0.0
    else:
        c = sum_w - math.fsum(wi * wi for wi in w) / sum_w
        tau2 = max(0.0, (q - (k - 1)) / c) if c > 0 else 0.0

    w_star = [1.0 / (v + tau2) for v in vs]
    sum_w_star = math.fsum(w_star)
    mu = math.fsum(wi * yi for wi, yi in zip(w_star, ys)) / sum_w_star
    se = math.sqrt(1.0 / sum_w_star)
    i2 = max(0.0, (q - (k - 1)) / q) if (k > 1 and q > 0) else 0.0
    return PooledResult(
        mu=mu,
        se=se,
        ci95=(mu - Z_95 * se, mu + Z_95 * se),
        tau2=tau2,
        Q=q,
        I2=i2,
        k=k,
    )


def leave_one_out(estimates: Sequence[StudyEstimate]) -> list[tuple[str, PooledResult]]:
    """Re-pool k times, excluding one study each time. Requires k >= 2."""
    if len(estimates) < 2:
        raise EmptyGroupError("leave-one-out requires at least 2 studies")
    _check_kinds(estimates)
    out = []
    for i, excluded in enumerate(estimates):
        rest = [e for j, e in enumerate(estimates) if j != i]
        out.append((excluded.result_id, pool_random_effects(rest)))
    return out


def pool_with_inclusion(estimates: Sequence[StudyEstimate],
                        include_mask: Sequence[bool]) -> PooledResult:
    """Pool exactly the masked-in subset; identical to filtering then pooling."""
    if len(include_mask) != len(estimates):
        raise ValidationError(
            f"mask length {len(include_mask)} != estimate count {len(estimates)}")
    subset = [e for e, keep in zip(estimates, include_mask) if keep]
    if not subset:
        raise EmptyGroupError("inclusion mask leaves no studies to pool")
    return pool_random_effects(subset)
